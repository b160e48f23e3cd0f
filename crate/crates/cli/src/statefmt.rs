//! Textual mini-grammars for states and single-qubit stage gates.
//!
//! States:
//!   bell:xy              one of the four Bell states, x,y ∈ {0,1}
//!   comp:b₀b₁…           computational basis state, qubit 0 first
//!   amp:re,im;re,im;…    explicit amplitudes (power-of-two count),
//!                        normalized on parse
//!
//! Stages (comma-separated list): I, X, Y, Z, H, or mat:a;b;c;d with the
//! four entries row-major, each `re` or `re/im`.

use backwire::kernel::{bell_state, gates, BellLabel};
use backwire::{C64, Matrix, State};

pub fn parse_state(spec: &str) -> Result<State, String> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| format!("state '{spec}' must look like bell:xy, comp:bits, or amp:…"))?;
    match kind {
        "bell" => {
            let bits: Vec<u8> = parse_bits(body)?;
            if bits.len() != 2 {
                return Err(format!("bell label needs two bits, got '{body}'"));
            }
            let label = BellLabel::new(bits[0], bits[1]).map_err(|e| e.to_string())?;
            Ok(bell_state(label))
        }
        "comp" => {
            let bits = parse_bits(body)?;
            if bits.is_empty() {
                return Err("comp: needs at least one bit".into());
            }
            Ok(State::from_bits(&bits))
        }
        "amp" => {
            let mut amps = Vec::new();
            for part in body.split(';') {
                let (re, im) = part
                    .split_once(',')
                    .ok_or_else(|| format!("amplitude '{part}' must be re,im"))?;
                amps.push(C64::new(parse_real(re)?, parse_real(im)?));
            }
            if !amps.len().is_power_of_two() || amps.len() < 2 {
                return Err(format!(
                    "amp: needs a power-of-two amplitude count ≥ 2, got {}",
                    amps.len()
                ));
            }
            let n = amps.len().trailing_zeros() as usize;
            State::new(n, amps)
                .map_err(|e| e.to_string())?
                .normalized()
                .map_err(|_| "amp: state has zero norm".to_string())
        }
        other => Err(format!("unknown state kind '{other}'")),
    }
}

pub fn parse_stages(spec: &str) -> Result<Vec<Matrix>, String> {
    spec.split(',')
        .map(|s| parse_stage(s.trim()))
        .collect()
}

fn parse_stage(spec: &str) -> Result<Matrix, String> {
    match spec.to_ascii_uppercase().as_str() {
        "I" => return Ok(Matrix::identity(2)),
        "X" => return Ok(gates::x()),
        "Y" => return Ok(gates::y()),
        "Z" => return Ok(gates::z()),
        "H" => return Ok(gates::h()),
        _ => {}
    }
    let body = spec
        .strip_prefix("mat:")
        .ok_or_else(|| format!("unknown stage '{spec}' (use I, X, Y, Z, H, or mat:a;b;c;d)"))?;
    let entries: Vec<C64> = body
        .split(';')
        .map(parse_complex)
        .collect::<Result<_, _>>()?;
    if entries.len() != 4 {
        return Err(format!("mat: needs 4 entries, got {}", entries.len()));
    }
    Ok(Matrix::from_nested(vec![
        vec![entries[0], entries[1]],
        vec![entries[2], entries[3]],
    ]))
}

fn parse_complex(s: &str) -> Result<C64, String> {
    match s.split_once('/') {
        Some((re, im)) => Ok(C64::new(parse_real(re)?, parse_real(im)?)),
        None => Ok(C64::new(parse_real(s)?, 0.0)),
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>, String> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(format!("'{other}' is not a bit")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_and_comp_states_parse() {
        let b = parse_state("bell:10").unwrap();
        assert_eq!(b.num_qubits(), 2);
        assert!((b.amp(1).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let c = parse_state("comp:101").unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.amp(0b101).re, 1.0);
    }

    #[test]
    fn amp_states_are_normalized_on_parse() {
        let s = parse_state("amp:3,0;0,4").unwrap();
        assert!((s.amp(0).re - 0.6).abs() < 1e-15);
        assert!((s.amp(1).im - 0.8).abs() < 1e-15);
        assert!(parse_state("amp:0,0;0,0").is_err());
        assert!(parse_state("amp:1,0;0,0;0,0").is_err());
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(parse_state("bell:2x").is_err());
        assert!(parse_state("foo:1").is_err());
        assert!(parse_state("comp:").is_err());
        assert!(parse_state("plain").is_err());
    }

    #[test]
    fn stages_parse_names_and_matrices() {
        let stages = parse_stages("I,x,mat:0;1;1;0").unwrap();
        assert_eq!(stages.len(), 3);
        assert_eq!(stages[1], stages[2]);
        assert!(parse_stages("Q").is_err());
        assert!(parse_stages("mat:1;2;3").is_err());
    }

    #[test]
    fn matrix_entries_take_imaginary_parts() {
        let stages = parse_stages("mat:0;0/-1;0/1;0").unwrap();
        assert_eq!(stages[0], gates::y());
    }
}
