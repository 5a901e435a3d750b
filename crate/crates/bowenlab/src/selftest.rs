//! Built-in invariant suite behind `bowenlab selftest`. Every check is
//! deterministic and fast; failures surface with the module's own error
//! classification so the exit code tells the failure class.

use crate::cocycle::{check_subadditivity, sv_weight, Flavor};
use crate::dimension::{bowen_root, box_dimension, caratheodory_dim, mcmullen_dim};
use crate::error::{Error, Result};
use crate::exceptional::{pesin_check, theorem_a_series};
use crate::map_models::{Model, ModelConfig};
use crate::pressure::{
    build_separated_set, pressure_separated_over, pressure_spectral, variational_gap,
    verify_separation,
};
use crate::symbolic::coding;

const LN_PHI: f64 = 0.481_211_825_059_603_47;

fn fail(name: &str, detail: String) -> Error {
    Error::InternalConsistency(format!("{name}: {detail}"))
}

fn shear() -> Model {
    Model::new(ModelConfig::LinearToral { matrix: vec![vec![2, 1], vec![0, 3]] }).unwrap()
}

fn conformal_bowen_roots() -> Result<()> {
    let model = Model::doubling();
    let sft = coding(&model)?;
    for flavor in [Flavor::Sub, Flavor::Super] {
        let r = bowen_root(&model, &sft, flavor, 1e-10)?;
        if (r.root - 1.0).abs() > 1e-9 {
            return Err(fail("conformal root", format!("{:?} root {}", flavor, r.root)));
        }
    }
    Ok(())
}

fn nonconformal_bowen_roots() -> Result<()> {
    let model = Model::diagonal_toral(&[2, 3])?;
    let sft = coding(&model)?;
    for flavor in [Flavor::Sub, Flavor::Super] {
        let r = bowen_root(&model, &sft, flavor, 1e-10)?;
        if (r.root - 2.0).abs() > 1e-9 {
            return Err(fail("nonconformal root", format!("{:?} root {}", flavor, r.root)));
        }
    }
    Ok(())
}

fn potential_additivity() -> Result<()> {
    for model in [Model::diagonal_toral(&[2, 3])?, shear(), Model::golden_mean_affine()] {
        let rep = check_subadditivity(&model, 200, 40, 0)?;
        if rep.max_phi_violation > 1e-9
            || rep.max_psi_violation > 1e-9
            || rep.max_order_violation > 1e-9
        {
            return Err(fail(
                "potential additivity",
                format!(
                    "phi {} psi {} order {}",
                    rep.max_phi_violation, rep.max_psi_violation, rep.max_order_violation
                ),
            ));
        }
    }
    Ok(())
}

fn determinant_identity() -> Result<()> {
    for model in [Model::diagonal_toral(&[2, 3])?, shear()] {
        let j = model.constant_jacobian().expect("linear model");
        let sv = j.singular_values()?;
        let d = model.dim() as f64;
        let det = j.det().abs().ln();
        for flavor in [Flavor::Sub, Flavor::Super] {
            let full = sv_weight(&sv, d, flavor)?;
            if (full - det).abs() > 1e-9 {
                return Err(fail("determinant split", format!("{full} vs {det}")));
            }
        }
    }
    Ok(())
}

fn pesin_identity() -> Result<()> {
    pesin_check(&Model::diagonal_toral(&[2, 3])?)?;
    pesin_check(&shear())?;
    Ok(())
}

fn parry_closes_the_gap() -> Result<()> {
    let model = Model::diagonal_toral(&[2, 3])?;
    let sft = coding(&model)?;
    let mu = sft.parry_measure()?;
    for s in [0.0, 2.0] {
        let gap = variational_gap(&model, &sft, Flavor::Sub, s, &mu)?;
        if gap.abs() > 1e-10 {
            return Err(fail("variational gap", format!("s {s}: gap {gap}")));
        }
    }
    Ok(())
}

fn golden_avoidance_row() -> Result<()> {
    let rows = theorem_a_series(&Model::doubling(), &[0.0], 2, 3)?;
    let r = &rows[0];
    if (r.h_top - LN_PHI).abs() > 1e-12 || (r.s_star - LN_PHI / 2f64.ln()).abs() > 1e-9 {
        return Err(fail("golden avoidance", format!("h {} s* {}", r.h_top, r.s_star)));
    }
    Ok(())
}

fn caratheodory_agreement() -> Result<()> {
    let model = Model::diagonal_toral(&[2, 3])?;
    let sft = coding(&model)?;
    let est = caratheodory_dim(&model, &sft, 0.05, 8)?;
    if (est.alpha - 2.0).abs() > 1e-6 {
        return Err(fail("caratheodory crossing", format!("alpha {}", est.alpha)));
    }
    Ok(())
}

fn mcmullen_closed_forms() -> Result<()> {
    let all: Vec<(u32, u32)> = (0..2).flat_map(|c| (0..3).map(move |r| (c, r))).collect();
    let cases = [
        (mcmullen_dim(3, 2, &all)?, 2.0),
        (mcmullen_dim(3, 2, &[(0, 0), (1, 2)])?, 1.0),
        (mcmullen_dim(3, 2, &[(0, 0), (0, 1), (1, 0), (1, 2)])?, 1.630_929_753_571_457_5),
    ];
    for (got, want) in cases {
        if (got - want).abs() > 1e-12 {
            return Err(fail("mcmullen value", format!("{got} vs {want}")));
        }
    }
    Ok(())
}

fn separated_set_certified() -> Result<()> {
    let model = Model::diagonal_toral(&[2, 3])?;
    let sft = coding(&model)?;
    let set = build_separated_set(&model, 3, 0.1)?;
    let rep = verify_separation(&model, &set)?;
    if rep.min_dn < 0.1 {
        return Err(fail("separation", format!("min d_n {}", rep.min_dn)));
    }
    let sep = pressure_separated_over(&model, &set, Flavor::Sub, 1.5)?;
    let spec = pressure_spectral(&model, &sft, Flavor::Sub, 1.5, 3)?;
    if (sep.value - spec.value).abs() > 1e-9 {
        return Err(fail("separated estimate", format!("{} vs {}", sep.value, spec.value)));
    }
    Ok(())
}

fn box_counting_square() -> Result<()> {
    let model = Model::diagonal_toral(&[2, 3])?;
    let est = box_dimension(&model, &coding(&model)?, 10)?;
    if (est.dimension - 2.0).abs() > 0.05 {
        return Err(fail("box dimension", format!("{}", est.dimension)));
    }
    Ok(())
}

/// Run every check, printing one PASS line per name.
pub fn run_all() -> Result<()> {
    let checks: [(&str, fn() -> Result<()>); 11] = [
        ("conformal_bowen_roots", conformal_bowen_roots),
        ("nonconformal_bowen_roots", nonconformal_bowen_roots),
        ("potential_additivity", potential_additivity),
        ("determinant_identity", determinant_identity),
        ("pesin_identity", pesin_identity),
        ("parry_closes_the_gap", parry_closes_the_gap),
        ("golden_avoidance_row", golden_avoidance_row),
        ("caratheodory_agreement", caratheodory_agreement),
        ("mcmullen_closed_forms", mcmullen_closed_forms),
        ("separated_set_certified", separated_set_certified),
        ("box_counting_square", box_counting_square),
    ];
    for (name, check) in checks {
        check()?;
        println!("PASS {name}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    #[test]
    fn the_suite_is_green() {
        super::run_all().unwrap();
    }
}
