//! Rendering of symbolic states as proposition lines, mirroring the style
//! of annotated listings: `{class(q), (e_x, b) =q ..., x ↔ e_x}`.

use num_complex::Complex64;

use crate::linalg::{Amp, SymVector};
use crate::props::{EvalCtx, ParamTable};

use super::symstate::{BitBinding, StateMode, SymState};

/// Render a scalar, recognizing the dyadic magnitudes that dominate gate
/// algebra (1, 1/√2, 1/2, ...), with phases ±1 and ±i.
pub fn nice_scalar(c: Complex64) -> String {
    let tol = 1e-9;
    let mag = c.norm();
    for k in 0..=8u32 {
        let m = 2f64.powf(-(k as f64) / 2.0);
        if (mag - m).abs() > tol {
            continue;
        }
        let phase = c / m;
        let sign = if (phase.re - 1.0).abs() < tol && phase.im.abs() < tol {
            Some("")
        } else if (phase.re + 1.0).abs() < tol && phase.im.abs() < tol {
            Some("-")
        } else if phase.re.abs() < tol && (phase.im - 1.0).abs() < tol {
            Some("i")
        } else if phase.re.abs() < tol && (phase.im + 1.0).abs() < tol {
            Some("-i")
        } else {
            None
        };
        if let Some(sign) = sign {
            let base = match k {
                0 => String::new(),
                1 => "1/sqrt(2)".to_string(),
                2 => "1/2".to_string(),
                3 => "1/(2sqrt(2))".to_string(),
                4 => "1/4".to_string(),
                _ => format!("1/sqrt({})", 1u64 << k),
            };
            return match (sign, base.as_str()) {
                ("", "") => "1".into(),
                ("-", "") => "-1".into(),
                ("i", "") => "i".into(),
                ("-i", "") => "-i".into(),
                (s, b) => {
                    if s.is_empty() {
                        b.into()
                    } else if s == "-" {
                        format!("-{b}")
                    } else {
                        format!("{s}·{b}")
                    }
                }
            };
        }
    }
    if c.im.abs() < tol {
        format!("{:.6}", c.re)
    } else {
        format!("{:.6}{:+.6}i", c.re, c.im)
    }
}

fn amp_str(a: &Amp, params: &ParamTable) -> String {
    let mut parts = Vec::new();
    for (mono, c) in a.terms() {
        let atoms: Vec<String> = mono.iter().map(|&id| params.atom_name(id)).collect();
        let coeff = nice_scalar(*c);
        let part = if atoms.is_empty() {
            coeff
        } else if coeff == "1" {
            atoms.join("·")
        } else if coeff == "-1" {
            format!("-{}", atoms.join("·"))
        } else {
            format!("{coeff}·{}", atoms.join("·"))
        };
        parts.push(part);
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        if let Some(stripped) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(stripped);
        } else {
            out.push_str(" + ");
            out.push_str(p);
        }
    }
    out
}

/// Render a symbolic vector as a ket sum. A vector equal to a whole family
/// renders as the family name; all-constant vectors with a common dyadic
/// magnitude factor it out in `(|..⟩ + |..⟩)/sqrt(2)` style.
pub fn render_vec(v: &SymVector, ctx: &EvalCtx) -> String {
    let params = &ctx.params;
    let n = v.n_qubits();

    // Whole-family recognition: v == family vector.
    for f in params.families() {
        if f.n_qubits == n && v.approx_eq(&f.vector(), 1e-12) {
            return f.name.clone();
        }
    }

    let bits = |i: usize| -> String {
        (0..n)
            .map(|p| if (i >> (n - 1 - p)) & 1 == 1 { '1' } else { '0' })
            .collect()
    };

    let nonzero: Vec<(usize, &Amp)> = v
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .collect();
    if nonzero.is_empty() {
        return "0".into();
    }

    // Common-magnitude constant factoring.
    let constants: Option<Vec<(usize, Complex64)>> = nonzero
        .iter()
        .map(|(i, a)| a.as_constant().map(|c| (*i, c)))
        .collect();
    if let Some(cs) = constants {
        let mag = cs[0].1.norm();
        if mag > 0.0 && cs.iter().all(|(_, c)| (c.norm() - mag).abs() < 1e-9) {
            let denom = nice_scalar(Complex64::new(mag, 0.0));
            let mut body = String::new();
            for (k, (i, c)) in cs.iter().enumerate() {
                let phase = nice_scalar(c / mag);
                let (sign, prefix) = match phase.as_str() {
                    "1" => ("+", String::new()),
                    "-1" => ("-", String::new()),
                    p if p.starts_with('-') => ("-", format!("{}·", &p[1..])),
                    p => ("+", format!("{p}·")),
                };
                if k == 0 {
                    if sign == "-" {
                        body.push('-');
                    }
                } else {
                    body.push_str(if sign == "-" { " - " } else { " + " });
                }
                body.push_str(&format!("{prefix}|{}⟩", bits(*i)));
            }
            return match denom.as_str() {
                "1" => body,
                "-1" => format!("-({body})"),
                d if d.starts_with("1/") => format!("({body})/{}", &d[2..]),
                d => format!("{d}·({body})"),
            };
        }
    }

    // General term-by-term rendering.
    let mut out = String::new();
    for (k, (i, a)) in nonzero.iter().enumerate() {
        let s = amp_str(a, params);
        let multi_term = s.contains(" + ") || s.contains(" - ");
        let (sign, coeff) = if multi_term {
            ("+", format!("({s})·"))
        } else if s == "1" {
            ("+", String::new())
        } else if s == "-1" {
            ("-", String::new())
        } else if let Some(stripped) = s.strip_prefix('-') {
            ("-", format!("{stripped}·"))
        } else {
            ("+", format!("{s}·"))
        };
        if k == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(if sign == "-" { " - " } else { " + " });
        }
        out.push_str(&format!("{coeff}|{}⟩", bits(*i)));
    }
    out
}

/// The full strongest-postcondition line for a state: consumed facts,
/// per-block state facts, measurement links, then residual facts.
pub fn render_state_facts(state: &SymState, ctx: &EvalCtx) -> String {
    let mut facts: Vec<String> = Vec::new();

    for name in &state.consumed {
        facts.push(format!("class({name})"));
    }

    if state.mode == StateMode::State {
        let mut blocks: Vec<usize> = (0..state.blocks().len()).collect();
        blocks.sort_by_key(|&i| state.position(state.blocks()[i].regs[0]));
        for bi in blocks {
            let b = &state.blocks()[bi];
            let names: Vec<String> = b
                .regs
                .iter()
                .map(|&r| state.info(r).name.clone())
                .collect();
            let vars = if names.len() == 1 {
                names[0].clone()
            } else {
                format!("({})", names.join(", "))
            };
            facts.push(format!("{vars} =q {}", render_vec(&b.vec, ctx)));
        }
    }

    for (bit, binding) in &state.bit_links {
        match binding {
            BitBinding::Ghost(reg) => {
                facts.push(format!("{bit} ↔ {}", state.info(*reg).name));
            }
            BitBinding::Literal(v) => facts.push(format!("{bit} =c {v}")),
        }
    }

    for f in &state.facts {
        facts.push(crate::surface::pretty::pretty_prop(f));
    }

    if facts.is_empty() {
        "⊤".into()
    } else {
        facts.join(", ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymVector;
    use crate::props::RegTag::ProgramQubit;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn bell_state_renders_in_listing_style() {
        let v = SymVector::from_concrete(&[
            Complex64::new(S, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(S, 0.0),
        ]);
        let ctx = EvalCtx::default();
        assert_eq!(render_vec(&v, &ctx), "(|00⟩ + |11⟩)/sqrt(2)");
    }

    #[test]
    fn family_renders_by_name() {
        let mut ctx = EvalCtx::default();
        let f = ctx.params.fresh_family("psi", 1).clone();
        assert_eq!(render_vec(&f.vector(), &ctx), "psi");
    }

    #[test]
    fn state_facts_line_lists_blocks() {
        let mut st = SymState::new();
        st.add_block(
            &[("a".into(), ProgramQubit)],
            SymVector::basis(1, 0),
            12,
        )
        .unwrap();
        let ctx = EvalCtx::default();
        assert_eq!(render_state_facts(&st, &ctx), "a =q |0⟩");
    }
}
