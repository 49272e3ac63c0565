//! Test functions for `--f`: `phi:z1,z2,...` selects one eigenmode and
//! `file:path` loads a JSON-encoded spectral function.

use std::path::Path;

use phg_core::{FreqVector, SpectralFunction};

use crate::error::{CliError, CliResult};

pub fn parse_test_function(spec: &str, n: usize) -> CliResult<SpectralFunction> {
    let f = if let Some(rest) = spec.strip_prefix("phi:") {
        let coords = rest
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("bad eigenmode {rest:?}: {e}")))?;
        SpectralFunction::mode(FreqVector::new(coords))
    } else if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(Path::new(path), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?
    } else {
        return Err(CliError::Usage(format!("test function must be phi:z1,..,zn or file:path, got {spec:?}")));
    };
    if f.dim() != n {
        return Err(CliError::Usage(format!("test function has dimension {}, expected {n}", f.dim())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_modes() {
        let f = parse_test_function("phi:1,-2", 2).unwrap();
        assert_eq!(f.get(&FreqVector::new(vec![1, -2])), 1.0);
        assert!(parse_test_function("phi:1", 2).is_err());
        assert!(parse_test_function("phi:x", 1).is_err());
        assert!(parse_test_function("psi:1", 1).is_err());
    }
}
