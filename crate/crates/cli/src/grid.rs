//! Parsing of epsilon grids and base rays.

use hopflab::stability::Ray;

use crate::{CliError, CliResult};

/// Parse `0.5`, `0,0.5,1` or `0:1:5` (inclusive, `count` points).
pub fn parse_epsilon_grid(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!("range `{spec}` must be start:stop:count")));
        }
        let start = parse_number(parts[0])?;
        let stop = parse_number(parts[1])?;
        let count: usize =
            parts[2].trim().parse().map_err(|_| CliError::Config(format!("bad point count `{}`", parts[2])))?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        spec.split(',').filter(|s| !s.trim().is_empty()).map(parse_number).collect::<CliResult<_>>()?
    };
    if values.is_empty() {
        return Err(CliError::Config("epsilon grid is empty".into()));
    }
    for &v in &values {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Config(format!("epsilon must lie in [0, 1], got {v}")));
        }
    }
    let mut values = values;
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

fn parse_number(s: &str) -> CliResult<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::Config(format!("not a number: `{s}`")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("not a finite number: `{s}`")));
    }
    Ok(v)
}

pub fn parse_ray(spec: &str) -> CliResult<Ray> {
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    match compact.as_str() {
        "x1=0" => Ok(Ray::along_imaginary()),
        "x3=0" => Ok(Ray::along_real()),
        other => match other.strip_prefix("angle=") {
            Some(a) => Ok(Ray { angle: parse_number(a)? }),
            None => Err(CliError::Config(format!("unknown ray `{spec}`; use x1=0, x3=0 or angle=<radians>"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_epsilon_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_epsilon_grid("1,0,0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_epsilon_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_epsilon_grid("1.25").is_err());
        assert!(parse_epsilon_grid("").is_err());
        assert!(parse_epsilon_grid("0:1:0").is_err());
        assert!(parse_epsilon_grid("a").is_err());
    }

    #[test]
    fn rays() {
        assert_eq!(parse_ray("x1=0").unwrap(), Ray::along_imaginary());
        assert_eq!(parse_ray("x3 = 0").unwrap(), Ray::along_real());
        assert_eq!(parse_ray("angle=0.5").unwrap(), Ray { angle: 0.5 });
        assert!(parse_ray("x2=0").is_err());
    }
}
