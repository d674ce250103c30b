//! Parsers for the compound flag syntaxes.

use bayes_evt::GridSpec;

/// `xi:MIN:MAX:STEP,beta:MIN:MAX:STEP`, axes in either order.
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let mut xi = None;
    let mut beta = None;
    for part in s.split(',') {
        let fields: Vec<&str> = part.trim().split(':').collect();
        let [name, min, max, step] = fields.as_slice() else {
            return Err(format!("grid axis '{part}' must look like name:min:max:step"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("bad number '{v}' in grid: {e}"));
        let triple = (num(min)?, num(max)?, num(step)?);
        match *name {
            "xi" => xi = Some(triple),
            "beta" => beta = Some(triple),
            other => return Err(format!("unknown grid axis '{other}' (expected xi or beta)")),
        }
    }
    let (Some(xi), Some(beta)) = (xi, beta) else {
        return Err("grid needs both xi and beta axes".into());
    };
    GridSpec::from_step_sizes(xi, beta).map_err(|e| e.to_string())
}

/// `FROM:TO`, inclusive.
pub fn parse_years(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("year range '{s}' must look like FROM:TO"))?;
    let from = a.trim().parse::<i32>().map_err(|e| format!("bad year '{a}': {e}"))?;
    let to = b.trim().parse::<i32>().map_err(|e| format!("bad year '{b}': {e}"))?;
    if from > to {
        return Err(format!("year range {from}:{to} is reversed"));
    }
    Ok((from, to))
}

/// `YEAR=VALUE`.
pub fn parse_override(s: &str) -> Result<(i32, f64), String> {
    let (y, v) = s.split_once('=').ok_or_else(|| format!("override '{s}' must look like YEAR=VALUE"))?;
    let year = y.trim().parse::<i32>().map_err(|e| format!("bad year '{y}': {e}"))?;
    let value = v.trim().parse::<f64>().map_err(|e| format!("bad value '{v}': {e}"))?;
    Ok((year, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag() {
        let g = parse_grid("xi:0.05:1.0:0.001,beta:0.1:2.5:0.001").unwrap();
        assert_eq!(g, GridSpec::default());
        let swapped = parse_grid("beta:0.1:2.5:0.001, xi:0.05:1.0:0.001").unwrap();
        assert_eq!(g, swapped);
        assert!(parse_grid("xi:0.05:1.0:0.001").is_err());
        assert!(parse_grid("xi:0.05:1.0,beta:0.1:2.5:0.1").is_err());
        assert!(parse_grid("mu:0:1:0.1,beta:0.1:2.5:0.1").is_err());
    }

    #[test]
    fn years_and_overrides() {
        assert_eq!(parse_years("1989:2021").unwrap(), (1989, 2021));
        assert!(parse_years("2021:1989").is_err());
        assert!(parse_years("1989").is_err());
        assert_eq!(parse_override("2014=5.0").unwrap(), (2014, 5.0));
        assert!(parse_override("2014:5").is_err());
    }
}
