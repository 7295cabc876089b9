/// Replacement `t` and `s` sample grids for every numeric check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridOverride {
    pub t: Option<Vec<f64>>,
    pub s: Option<Vec<f64>>,
}

/// `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("{:?} is not a number", x.trim()));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, h, b) = (num(start)?, num(step)?, num(stop)?);
            if h.is_nan() || h <= 0.0 || b < a {
                return Err(format!("range {spec:?} needs a positive step and start <= stop"));
            }
            let n = ((b - a) / h).round();
            if (a + n * h - b).abs() > 1e-9 * h.max(b.abs()) {
                return Err(format!("range {spec:?}: step does not divide the interval"));
            }
            let n = n as usize;
            Ok((0..=n).map(|i| if i == n { b } else { a + i as f64 * h }).collect())
        }
        [_] => {
            let v = spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() {
                return Err("empty grid".into());
            }
            Ok(v)
        }
        _ => Err(format!("cannot read grid {spec:?}")),
    }
}

/// `t=0:0.1:1;s=-1,0,1`; either part may be omitted.
pub fn parse_grid(spec: &str) -> Result<GridOverride, String> {
    let mut out = GridOverride::default();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part.split_once('=').ok_or_else(|| format!("expected NAME=VALUES, found {part:?}"))?;
        let values = parse_values(values)?;
        match key.trim() {
            "t" => out.t = Some(values),
            "s" => out.s = Some(values),
            other => return Err(format!("unknown grid axis {other:?} (expected t or s)")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        let t = parse_values("0:0.1:1").unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t[10], 1.0);
        assert!((t[3] - 0.3).abs() < 1e-15);
        assert_eq!(parse_values("-1, -0.5,0").unwrap(), vec![-1.0, -0.5, 0.0]);
        assert!(parse_values("0:0.3:1").is_err());
        assert!(parse_values("a").is_err());
        let g = parse_grid("t=0:0.5:1; s=-1,1").unwrap();
        assert_eq!(g.t, Some(vec![0.0, 0.5, 1.0]));
        assert_eq!(g.s, Some(vec![-1.0, 1.0]));
        assert!(parse_grid("u=1").is_err());
    }
}
