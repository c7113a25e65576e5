//! Single-qubit Pauli matrices and Pauli-string parsing.

use super::linalg::{c64, kron_all, CMatrix, I, ONE, ZERO};
use crate::error::{Result, WallError};

pub fn id2() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> CMatrix {
    let h = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Projector `|a⟩⟨a|` in the computational basis of dimension `d`.
pub fn basis_projector(d: usize, a: usize) -> CMatrix {
    let mut p = CMatrix::zeros(d, d);
    p[(a, a)] = ONE;
    p
}

/// Matrix unit `|i⟩⟨j|`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    e[(i, j)] = ONE;
    e
}

pub fn pauli_char(ch: char) -> Option<CMatrix> {
    match ch.to_ascii_uppercase() {
        'I' => Some(id2()),
        'X' => Some(x()),
        'Y' => Some(y()),
        'Z' => Some(z()),
        _ => None,
    }
}

/// Parses a string like `"ZX"` into `Z ⊗ X`; the first character is site 0.
pub fn parse_pauli(s: &str) -> Result<CMatrix> {
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return Err(WallError::Parse("empty Pauli string".into()));
    }
    let mut factors = Vec::with_capacity(trimmed.len());
    for (pos, ch) in trimmed.chars().enumerate() {
        let m = pauli_char(ch).ok_or_else(|| {
            WallError::Parse(format!(
                "invalid Pauli character '{ch}' at position {pos} in \"{trimmed}\" (expected one of I, X, Y, Z)"
            ))
        })?;
        factors.push(m);
    }
    Ok(kron_all(factors.iter()))
}

/// Parses a comma-separated list of Pauli strings of equal length.
pub fn parse_pauli_list(s: &str) -> Result<Vec<CMatrix>> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if let Some(first) = items.first() {
        if let Some(bad) = items.iter().find(|p| p.chars().count() != first.chars().count()) {
            return Err(WallError::Parse(format!(
                "Pauli strings must have equal length: \"{first}\" vs \"{bad}\""
            )));
        }
    }
    items.into_iter().map(parse_pauli).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::linalg::{frob, kron, matmul};

    #[test]
    fn pauli_algebra_relations() {
        let xy = matmul(&x(), &y());
        assert!(frob(&(xy - z() * I)) < 1e-15);
        for p in [x(), y(), z()] {
            assert!(frob(&(matmul(&p, &p) - id2())) < 1e-15);
        }
    }

    #[test]
    fn parses_strings_with_site_zero_first() {
        assert_eq!(parse_pauli("ZX").unwrap(), kron(&z(), &x()));
        assert_eq!(parse_pauli_list("XI, ZX").unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_character_by_name() {
        let err = parse_pauli("XQ").unwrap_err().to_string();
        assert!(err.contains("'Q'"), "{err}");
        assert!(err.contains("position 1"), "{err}");
    }

    #[test]
    fn rejects_ragged_lists() {
        assert!(parse_pauli_list("XI,Z").is_err());
    }
}
