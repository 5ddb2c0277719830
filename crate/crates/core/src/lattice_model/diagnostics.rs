use super::table::CouplingTable;
use crate::error::{Error, Result};

/// Σ_n (J^x² + J^y² + J^z²) and Σ_n (J^x² + J^y² + J^z²)² for every site,
/// each accumulated over neighbors in displacement order.
fn per_site_sums(table: &CouplingTable) -> Vec<(f64, f64)> {
    table
        .adjacency()
        .iter()
        .map(|list| {
            list.iter().fold((0.0, 0.0), |(s, s2), nb| {
                let w = nb.coupling.norm_sq();
                (s + w, s2 + w * w)
            })
        })
        .collect()
}

fn site_independent(values: &[f64]) -> Result<f64> {
    let first = values[0];
    if values.iter().any(|&v| v != first) {
        return Err(Error::InvalidLattice(
            "coupling table is not translationally invariant".into(),
        ));
    }
    Ok(first)
}

/// Characteristic time τ: the inverse root-mean-square local field,
/// [Σ_n (J^x² + J^y² + J^z²) ⟨(S^α)²⟩]^(-1/2). Identical on every site.
pub fn compute_tau(table: &CouplingTable) -> Result<f64> {
    let sums: Vec<f64> = per_site_sums(table).into_iter().map(|(s, _)| s).collect();
    let s = site_independent(&sums)?;
    if s == 0.0 {
        return Err(Error::NoDynamics);
    }
    Ok((s * table.kind().mean_square_component()).powf(-0.5))
}

/// Effective number of strongly coupled neighbors: the participation ratio
/// [Σ_n w_n]² / Σ_n w_n² with w_n = J^x² + J^y² + J^z².
pub fn compute_neff(table: &CouplingTable) -> Result<f64> {
    let sums = per_site_sums(table);
    let s = site_independent(&sums.iter().map(|p| p.0).collect::<Vec<_>>())?;
    let s2 = site_independent(&sums.iter().map(|p| p.1).collect::<Vec<_>>())?;
    if s2 == 0.0 {
        return Err(Error::NoDynamics);
    }
    Ok(s * s / s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_model::{build_nearest_neighbor, rescale_for_quantum, Coupling, LatticeSpec};
    use crate::spin::{Spin, SpinKind};

    #[test]
    fn chain_tau_by_hand() {
        let spec = LatticeSpec::chain(12).unwrap();
        let t = build_nearest_neighbor(&spec, Coupling::new(-0.41, -0.41, 0.82), SpinKind::Classical)
            .unwrap();
        let expected = (2.0 * (0.41f64.powi(2) * 2.0 + 0.82f64.powi(2)) / 3.0).powf(-0.5);
        let tau = compute_tau(&t).unwrap();
        assert!((tau - expected).abs() < 1e-14);
        assert!((tau - 1.2196).abs() < 1e-4);
        assert_eq!(compute_neff(&t).unwrap(), 2.0);

        let q = rescale_for_quantum(&t, Spin::HALF).unwrap();
        assert!((compute_tau(&q).unwrap() / tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_pair_tau() {
        let spec = LatticeSpec::chain(2).unwrap();
        let t = build_nearest_neighbor(&spec, Coupling::new(0.0, 0.0, 2.5), SpinKind::Classical)
            .unwrap();
        assert!((compute_tau(&t).unwrap() - 3f64.sqrt() / 2.5).abs() < 1e-15);
    }

    #[test]
    fn square_neff_is_four() {
        let spec = LatticeSpec::square(5).unwrap();
        let t = build_nearest_neighbor(&spec, Coupling::new(0.0, -1.0, 1.0), SpinKind::Classical)
            .unwrap();
        assert_eq!(compute_neff(&t).unwrap(), 4.0);
    }

    #[test]
    fn zero_couplings_have_no_dynamics() {
        let spec = LatticeSpec::chain(2).unwrap();
        let t = build_nearest_neighbor(&spec, Coupling::ZERO, SpinKind::Classical).unwrap();
        assert!(matches!(compute_tau(&t), Err(Error::NoDynamics)));
        assert!(matches!(compute_neff(&t), Err(Error::NoDynamics)));
    }
}
