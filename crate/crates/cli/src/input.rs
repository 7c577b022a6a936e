//! Parsing of command-line tokens into library values: Bloch vectors,
//! complex amplitudes, observables, and states (inline JSON or named
//! shorthands).

use num_complex::Complex64;

use quantumness::operators::{
    operator_from_json_str, state_from_json_str, BlochVector, DensityState, HermitianOperator,
};
use quantumness::phase_space::{CoherentVector, FockSpace1M};

use crate::Failure;

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Failure::validation(format!("not a number: {part:?}")))
        })
        .collect()
}

pub fn parse_bloch(text: &str) -> Result<BlochVector, Failure> {
    let parts = parse_f64_list(text)?;
    if parts.len() != 3 {
        return Err(Failure::validation(format!(
            "expected three comma-separated components, got {}",
            parts.len()
        )));
    }
    Ok(BlochVector::new(parts[0], parts[1], parts[2]))
}

/// Two complex components as `re1,im1,re2,im2`.
pub fn parse_amplitude(text: &str) -> Result<[Complex64; 2], Failure> {
    let parts = parse_f64_list(text)?;
    if parts.len() != 4 {
        return Err(Failure::validation(format!(
            "expected four comma-separated components re1,im1,re2,im2, got {}",
            parts.len()
        )));
    }
    Ok([
        Complex64::new(parts[0], parts[1]),
        Complex64::new(parts[2], parts[3]),
    ])
}

/// A 2x2 observable: a named form or an inline JSON matrix.
pub fn parse_observable2(text: &str) -> Result<HermitianOperator, Failure> {
    let obs = match text {
        "identity" => HermitianOperator::identity(2),
        "pauli-x" => HermitianOperator::pauli_x(),
        "pauli-y" => HermitianOperator::pauli_y(),
        "pauli-z" => HermitianOperator::pauli_z(),
        _ if text.starts_with('{') => operator_from_json_str(text)?,
        _ => {
            return Err(Failure::validation(format!(
                "unknown observable {text:?}; use identity, pauli-x, pauli-y, pauli-z, \
                 or an inline JSON matrix"
            )))
        }
    };
    if obs.dim() != 2 {
        return Err(Failure::validation(format!(
            "observable must be 2x2, got dimension {}",
            obs.dim()
        )));
    }
    Ok(obs)
}

/// An observable of any dimension: inline JSON only.
pub fn parse_observable(text: &str) -> Result<HermitianOperator, Failure> {
    if text.starts_with('{') {
        Ok(operator_from_json_str(text)?)
    } else {
        parse_observable2(text)
    }
}

/// A density matrix: inline JSON of any dimension.
pub fn parse_state(text: &str) -> Result<DensityState, Failure> {
    Ok(state_from_json_str(text)?)
}

/// A single-mode state on the cutoff basis: named shorthand or inline JSON
/// whose dimension must be cutoff + 1.
pub fn parse_mode_state(text: &str, space: &FockSpace1M) -> Result<DensityState, Failure> {
    if text.starts_with('{') {
        let rho = state_from_json_str(text)?;
        if rho.dim() != space.dim() {
            return Err(Failure::validation(format!(
                "state dimension {} does not match cutoff {} (needs {})",
                rho.dim(),
                space.cutoff(),
                space.dim()
            )));
        }
        return Ok(rho);
    }
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    match (name, arg) {
        ("vacuum", None) => Ok(space.vacuum()),
        ("number", Some(n)) => {
            let n: usize = n
                .parse()
                .map_err(|_| Failure::validation(format!("not an occupation number: {n:?}")))?;
            Ok(space.number_state(n)?)
        }
        ("coherent", Some(spec)) => {
            let parts = parse_f64_list(spec)?;
            let alpha = match parts.len() {
                1 => Complex64::new(parts[0], 0.0),
                2 => Complex64::new(parts[0], parts[1]),
                n => {
                    return Err(Failure::validation(format!(
                        "coherent takes re or re,im, got {n} components"
                    )))
                }
            };
            Ok(CoherentVector::new(space, alpha).state())
        }
        ("thermal", Some(nbar)) => {
            let nbar: f64 = nbar
                .parse()
                .map_err(|_| Failure::validation(format!("not a mean occupation: {nbar:?}")))?;
            Ok(space.thermal_state(nbar)?)
        }
        _ => Err(Failure::validation(format!(
            "unknown state {text:?}; use vacuum, number:N, coherent:RE[,IM], thermal:NBAR, \
             or an inline JSON matrix"
        ))),
    }
}
