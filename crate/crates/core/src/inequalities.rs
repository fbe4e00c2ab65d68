//! Rank-product inequality suites for multipartite states.
//!
//! All checks run on exact integer rank products rather than entropies:
//! `sum_i log2(r_i) >= log2(r)` is equivalent to `prod_i r_i >= r`, so no
//! real arithmetic is needed anywhere. Logarithms appear only in rendered
//! report text downstream.

use crate::error::{Error, Result};
use crate::states::DensityMatrix;
use std::collections::HashMap;

/// One rank-product comparison `lhs >= rhs` with the ranks that entered it.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
    pub saturated: bool,
    pub witness_ranks: Vec<(String, u64)>,
}

impl InequalityReport {
    fn new(name: String, lhs: u64, rhs: u64, witness_ranks: Vec<(String, u64)>) -> Self {
        Self {
            holds: lhs >= rhs,
            saturated: lhs == rhs,
            name,
            lhs,
            rhs,
            witness_ranks,
        }
    }
}

/// Saturation classes with known exact conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaturationClass {
    /// Rank-one joint state.
    Pure,
    /// `rho = rho_A (x) rho_BC`.
    ProductAxBc,
    /// `rho = rho_B (x) rho_AC`.
    ProductBxAc,
    /// `rho = rho_C (x) rho_AB`.
    ProductCxAb,
    /// Positive partial transpose across every bipartition cut.
    Ppt,
}

impl SaturationClass {
    pub fn name(&self) -> &'static str {
        match self {
            SaturationClass::Pure => "pure",
            SaturationClass::ProductAxBc => "product A x BC",
            SaturationClass::ProductBxAc => "product B x AC",
            SaturationClass::ProductCxAb => "product C x AB",
            SaturationClass::Ppt => "ppt",
        }
    }
}

/// Agreement report between the saturation equality `r_AB * r_AC = r_BC`
/// and the class-specific condition.
#[derive(Clone, Debug)]
pub struct SaturationReport {
    pub class: SaturationClass,
    pub condition_holds: bool,
    pub equality_holds: bool,
    pub witness_ranks: Vec<(String, u64)>,
}

impl SaturationReport {
    /// The class condition must track the equality exactly.
    pub fn agree(&self) -> bool {
        self.condition_holds == self.equality_holds
    }
}

/// Verdict of the necessary-condition check on a triple of two-party
/// marginals.
#[derive(Clone, Debug)]
pub struct MarginalReport {
    /// Single-party marginal agreement, in order (A, B, C).
    pub marginals_consistent: [bool; 3],
    /// Ranks of the three inputs (AB, AC, BC).
    pub input_ranks: [u64; 3],
    pub rank_checks: Vec<InequalityReport>,
    /// True when every necessary condition passed; false means no joint
    /// state can exist. Never claims sufficiency.
    pub joint_state_possible: bool,
}

/// Caches reduced ranks keyed by the kept subsystem subset.
struct RankCache<'a> {
    rho: &'a DensityMatrix,
    cache: HashMap<Vec<usize>, u64>,
}

impl<'a> RankCache<'a> {
    fn new(rho: &'a DensityMatrix) -> Self {
        Self {
            rho,
            cache: HashMap::new(),
        }
    }

    fn rank(&mut self, keep: &[usize]) -> Result<u64> {
        let mut key = keep.to_vec();
        key.sort_unstable();
        if let Some(&r) = self.cache.get(&key) {
            return Ok(r);
        }
        let r = self.rho.reduced_rank(&key)? as u64;
        self.cache.insert(key, r);
        Ok(r)
    }

    fn label(&self, subset: &[usize]) -> String {
        subset.iter().map(|&t| self.rho.label(t)).collect()
    }
}

fn require_valid(rho: &DensityMatrix) -> Result<()> {
    let report = rho.validate();
    if !report.is_valid() {
        return Err(Error::InvalidState(format!(
            "state fails validation (hermitian: {}, psd: {}, positive trace: {})",
            report.hermitian, report.positive_semidefinite, report.positive_trace
        )));
    }
    Ok(())
}

fn product_report(
    cache: &mut RankCache,
    lhs_subsets: &[&[usize]],
    rhs_subset: &[usize],
    rhs_power: u32,
) -> Result<InequalityReport> {
    let mut lhs = 1u64;
    let mut witness = Vec::new();
    let mut lhs_names = Vec::new();
    for subset in lhs_subsets {
        let r = cache.rank(subset)?;
        lhs *= r;
        lhs_names.push(format!("r({})", cache.label(subset)));
        witness.push((cache.label(subset), r));
    }
    let rhs_base = cache.rank(rhs_subset)?;
    let rhs = rhs_base.pow(rhs_power);
    witness.push((cache.label(rhs_subset), rhs_base));
    let rhs_name = if rhs_power == 1 {
        format!("r({})", cache.label(rhs_subset))
    } else {
        format!("r({})^{rhs_power}", cache.label(rhs_subset))
    };
    Ok(InequalityReport::new(
        format!("{} >= {}", lhs_names.join("*"), rhs_name),
        lhs,
        rhs,
        witness,
    ))
}

/// The rank inequality `r(XY) * r(XZ) >= r(YZ)` for every choice of the
/// right-hand marginal of a three-party state. All three must hold for every
/// valid state; a violation is an implementation bug.
pub fn check_rank_inequality(rho: &DensityMatrix) -> Result<Vec<InequalityReport>> {
    if rho.subsystem_count() != 3 {
        return Err(Error::InvalidArgument(
            "rank inequality requires exactly 3 subsystems".into(),
        ));
    }
    require_valid(rho)?;
    let mut cache = RankCache::new(rho);
    let mut out = Vec::new();
    // rhs marginal misses party x
    for x in 0..3usize {
        let others: Vec<usize> = (0..3).filter(|&t| t != x).collect();
        let mut lhs1 = [x, others[0]];
        let mut lhs2 = [x, others[1]];
        lhs1.sort_unstable();
        lhs2.sort_unstable();
        out.push(product_report(
            &mut cache,
            &[&lhs1, &lhs2],
            &others,
            1,
        )?);
    }
    Ok(out)
}

/// The full three-party suite over all party permutations:
/// `r(X)*r(Y) >= r(XY)`, `r(XY)*r(XZ)*r(YZ) >= r(X)^2`,
/// `r(XY)*r(XZ) >= r(YZ)`, and `r(XY)*r(XZ) >= r(X)`.
pub fn check_tripartite_suite(rho: &DensityMatrix) -> Result<Vec<InequalityReport>> {
    if rho.subsystem_count() != 3 {
        return Err(Error::InvalidArgument(
            "tripartite suite requires exactly 3 subsystems".into(),
        ));
    }
    require_valid(rho)?;
    let mut cache = RankCache::new(rho);
    let mut out = Vec::new();

    // subadditivity over each pair
    for x in 0..3usize {
        for y in x + 1..3 {
            out.push(product_report(&mut cache, &[&[x], &[y]], &[x, y], 1)?);
        }
    }
    // triple product against each squared single rank
    for x in 0..3usize {
        out.push(product_report(
            &mut cache,
            &[&[0, 1], &[0, 2], &[1, 2]],
            &[x],
            2,
        )?);
    }
    // the main inequality, all permutations
    out.extend(check_rank_inequality(rho)?);
    // its single-party corollary
    for x in 0..3usize {
        let others: Vec<usize> = (0..3).filter(|&t| t != x).collect();
        let mut lhs1 = [x, others[0]];
        let mut lhs2 = [x, others[1]];
        lhs1.sort_unstable();
        lhs2.sort_unstable();
        out.push(product_report(&mut cache, &[&lhs1, &lhs2], &[x], 1)?);
    }
    Ok(out)
}

/// Multipartite extensions for an `n`-party state (`n >= 3`), with cyclic
/// convention `A_{n+1} = A_1`:
/// the product of single ranks against the global rank, the cyclic and chain
/// two-party products, the `n = 4` triple and `n = 5` quadruple
/// leave-one-out products, and the all-but-one product against one single
/// rank. Inequalities whose arity does not match `n` are omitted.
pub fn check_multipartite_suite(rho: &DensityMatrix) -> Result<Vec<InequalityReport>> {
    let n = rho.subsystem_count();
    if n < 3 {
        return Err(Error::InvalidArgument(
            "multipartite suite requires at least 3 subsystems".into(),
        ));
    }
    require_valid(rho)?;
    let mut cache = RankCache::new(rho);
    let all: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();

    // product of single ranks bounds the global rank
    let singles: Vec<Vec<usize>> = (0..n).map(|t| vec![t]).collect();
    let single_refs: Vec<&[usize]> = singles.iter().map(Vec::as_slice).collect();
    out.push(product_report(&mut cache, &single_refs, &all, 1)?);

    // cyclic neighbor pairs against one squared single rank
    let cycle: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut pair = vec![j, (j + 1) % n];
            pair.sort_unstable();
            pair
        })
        .collect();
    let cycle_refs: Vec<&[usize]> = cycle.iter().map(Vec::as_slice).collect();
    out.push(product_report(&mut cache, &cycle_refs, &[0], 2)?);

    // chain of neighbor pairs against the endpoints pair
    let chain: Vec<Vec<usize>> = (0..n - 1).map(|j| vec![j, j + 1]).collect();
    let chain_refs: Vec<&[usize]> = chain.iter().map(Vec::as_slice).collect();
    out.push(product_report(&mut cache, &chain_refs, &[0, n - 1], 1)?);

    if n == 4 {
        out.push(product_report(
            &mut cache,
            &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3]],
            &[1, 2, 3],
            1,
        )?);
    }
    if n == 5 {
        out.push(product_report(
            &mut cache,
            &[&[0, 1, 2, 3], &[0, 1, 2, 4], &[0, 1, 3, 4], &[0, 2, 3, 4]],
            &[1, 2, 3, 4],
            1,
        )?);
    }

    // all-but-one marginals against one single rank
    let leave_outs: Vec<Vec<usize>> = (0..n)
        .map(|k| (0..n).filter(|&t| t != k).collect())
        .collect();
    let leave_refs: Vec<&[usize]> = leave_outs.iter().map(Vec::as_slice).collect();
    out.push(product_report(&mut cache, &leave_refs, &[0], 1)?);

    Ok(out)
}

fn states_equal_up_to_trace(a: &DensityMatrix, b: &DensityMatrix) -> bool {
    // cross-multiplied comparison avoids dividing by the traces
    let ta = a.trace();
    let tb = b.trace();
    a.matrix().scale(&tb) == b.matrix().scale(&ta)
}

/// Checks both sides of the saturation question for a state in one of the
/// five structural classes: the equality `r(AB) * r(AC) = r(BC)` and the
/// class condition must agree. Errors when the state is not verifiably in
/// the claimed class.
pub fn check_saturation(
    rho: &DensityMatrix,
    class: SaturationClass,
) -> Result<SaturationReport> {
    if rho.subsystem_count() != 3 {
        return Err(Error::InvalidArgument(
            "saturation analysis requires exactly 3 subsystems".into(),
        ));
    }
    require_valid(rho)?;

    // class membership
    match class {
        SaturationClass::Pure => {
            if rho.rank() != 1 {
                return Err(Error::InvalidState(
                    "claimed pure, but the rank is not one".into(),
                ));
            }
        }
        SaturationClass::ProductAxBc | SaturationClass::ProductBxAc | SaturationClass::ProductCxAb => {
            let lone: usize = match class {
                SaturationClass::ProductAxBc => 0,
                SaturationClass::ProductBxAc => 1,
                _ => 2,
            };
            let pair: Vec<usize> = (0..3).filter(|&t| t != lone).collect();
            let lone_state = rho.partial_trace(&[lone])?;
            let pair_state = rho.partial_trace(&pair)?;
            let product = DensityMatrix::tensor_assemble(
                rho.dims().to_vec(),
                &[(vec![lone], &lone_state), (pair.clone(), &pair_state)],
            )?;
            // rho_X (x) rho_YZ = tr(rho) * rho exactly for product states
            if product.matrix() != &rho.matrix().scale(&rho.trace()) {
                return Err(Error::InvalidState(format!(
                    "claimed {} but the marginal product differs from the state",
                    class.name()
                )));
            }
        }
        SaturationClass::Ppt => {
            for cut in 0..3usize {
                let pt = rho.partial_transpose(&[cut])?;
                let report = pt.validate();
                if !(report.hermitian && report.positive_semidefinite) {
                    return Err(Error::InvalidState(format!(
                        "claimed ppt but the transpose across cut {} is not PSD",
                        rho.label(cut)
                    )));
                }
            }
        }
    }

    let mut cache = RankCache::new(rho);
    let r_a = cache.rank(&[0])?;
    let r_b = cache.rank(&[1])?;
    let r_c = cache.rank(&[2])?;
    let r_ab = cache.rank(&[0, 1])?;
    let r_ac = cache.rank(&[0, 2])?;
    let r_bc = cache.rank(&[1, 2])?;

    let equality_holds = r_ab * r_ac == r_bc;
    let condition_holds = match class {
        SaturationClass::Pure => r_b * r_c == r_a,
        SaturationClass::ProductAxBc => r_a == 1 && r_bc == r_b * r_c,
        SaturationClass::ProductBxAc => r_a * r_ac == r_c,
        SaturationClass::ProductCxAb => r_a * r_ab == r_b,
        SaturationClass::Ppt => r_ab == r_b && r_ac == r_c && r_b * r_c == r_bc,
    };

    Ok(SaturationReport {
        class,
        condition_holds,
        equality_holds,
        witness_ranks: vec![
            ("A".into(), r_a),
            ("B".into(), r_b),
            ("C".into(), r_c),
            ("AB".into(), r_ab),
            ("AC".into(), r_ac),
            ("BC".into(), r_bc),
        ],
    })
}

/// Necessary conditions for three declared two-party marginals
/// `sigma_AB, sigma_AC, sigma_BC` to come from one joint state: consistent
/// single-party marginals (compared by trace cross-multiplication) and the
/// three rank inequalities. Failure proves no joint state exists; success
/// proves nothing further.
pub fn marginal_necessary_check(
    ab: &DensityMatrix,
    ac: &DensityMatrix,
    bc: &DensityMatrix,
) -> Result<MarginalReport> {
    for (name, sigma) in [("AB", ab), ("AC", ac), ("BC", bc)] {
        if sigma.subsystem_count() != 2 {
            return Err(Error::InvalidArgument(format!(
                "marginal {name} must have exactly 2 subsystems"
            )));
        }
        require_valid(sigma)?;
    }
    let (d_a, d_b) = (ab.dims()[0], ab.dims()[1]);
    let d_c = ac.dims()[1];
    if ac.dims()[0] != d_a || bc.dims()[0] != d_b || bc.dims()[1] != d_c {
        return Err(Error::Dimension(format!(
            "inconsistent declared dimensions: AB {:?}, AC {:?}, BC {:?}",
            ab.dims(),
            ac.dims(),
            bc.dims()
        )));
    }

    let consistent = |x: &DensityMatrix, kx: usize, y: &DensityMatrix, ky: usize| -> Result<bool> {
        let mx = x.partial_trace(&[kx])?;
        let my = y.partial_trace(&[ky])?;
        Ok(states_equal_up_to_trace(&mx, &my))
    };
    let marginals_consistent = [
        consistent(ab, 0, ac, 0)?, // A from AB vs AC
        consistent(ab, 1, bc, 0)?, // B from AB vs BC
        consistent(ac, 1, bc, 1)?, // C from AC vs BC
    ];

    let r_ab = ab.rank() as u64;
    let r_ac = ac.rank() as u64;
    let r_bc = bc.rank() as u64;
    let mk = |name: &str, lhs: u64, rhs: u64, pair: [(&str, u64); 3]| {
        InequalityReport::new(
            name.to_string(),
            lhs,
            rhs,
            pair.iter().map(|(s, r)| (s.to_string(), *r)).collect(),
        )
    };
    let ranks3 = [("AB", r_ab), ("AC", r_ac), ("BC", r_bc)];
    let rank_checks = vec![
        mk("r(AB)*r(AC) >= r(BC)", r_ab * r_ac, r_bc, ranks3),
        mk("r(AB)*r(BC) >= r(AC)", r_ab * r_bc, r_ac, ranks3),
        mk("r(AC)*r(BC) >= r(AB)", r_ac * r_bc, r_ab, ranks3),
    ];

    let joint_state_possible =
        marginals_consistent.iter().all(|&c| c) && rank_checks.iter().all(|r| r.holds);
    Ok(MarginalReport {
        marginals_consistent,
        input_ranks: [r_ab, r_ac, r_bc],
        rank_checks,
        joint_state_possible,
    })
}

/// Renders a report as a deterministic single line, shared by the CLI's
/// human-readable output.
pub fn render_inequality(report: &InequalityReport) -> String {
    let status = if !report.holds {
        "VIOLATED"
    } else if report.saturated {
        "holds (saturated)"
    } else {
        "holds"
    };
    format!(
        "{}: {} >= {} {}",
        report.name, report.lhs, report.rhs, status
    )
}

/// Log2 of a rank for display purposes only; never used in checks.
pub fn display_log2(rank: u64) -> f64 {
    (rank as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational;
    use crate::states::random_density;
    use num::{One, Zero};

    fn basis_state(dims: Vec<usize>, index: usize) -> DensityMatrix {
        let total: usize = dims.iter().product();
        let mut amps = vec![GaussianRational::zero(); total];
        amps[index] = GaussianRational::one();
        DensityMatrix::pure_projector(dims, amps).unwrap()
    }

    fn ghz(parties: usize) -> DensityMatrix {
        let dims = vec![2usize; parties];
        let total = 1usize << parties;
        let mut amps = vec![GaussianRational::zero(); total];
        amps[0] = GaussianRational::one();
        amps[total - 1] = GaussianRational::one();
        DensityMatrix::pure_projector(dims, amps).unwrap()
    }

    fn pair_state(d: usize) -> DensityMatrix {
        let mut amps = vec![GaussianRational::zero(); d * d];
        for i in 0..d {
            amps[i * d + i] = GaussianRational::one();
        }
        DensityMatrix::pure_projector(vec![d, d], amps).unwrap()
    }

    #[test]
    fn rank_inequality_on_basis_state_is_saturated() {
        let rho = basis_state(vec![2, 2, 2], 0);
        let reports = check_rank_inequality(&rho).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(r.holds && r.saturated, "{}", r.name);
            assert_eq!((r.lhs, r.rhs), (1, 1));
        }
    }

    #[test]
    fn rank_inequality_on_ghz_is_strict() {
        let reports = check_rank_inequality(&ghz(3)).unwrap();
        for r in &reports {
            assert_eq!((r.lhs, r.rhs), (4, 2), "{}", r.name);
            assert!(r.holds && !r.saturated);
        }
    }

    #[test]
    fn rank_inequality_rejects_invalid_states() {
        let m = crate::matrix::Matrix::from_fn(8, 8, |i, j| {
            GaussianRational::from_integers((i == 0 && j == 1) as i64, 0)
        });
        let rho = DensityMatrix::new(vec![2, 2, 2], m).unwrap();
        assert!(check_rank_inequality(&rho).is_err());
    }

    #[test]
    fn tripartite_suite_on_known_states() {
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        let reports = check_tripartite_suite(&mixed).unwrap();
        assert_eq!(reports.len(), 12);
        for r in &reports {
            assert!(r.holds, "{} on the maximally mixed state", r.name);
        }
        // subadditivity saturates there
        assert!(reports[..3].iter().all(|r| r.saturated));

        let basis = basis_state(vec![2, 2, 2], 0);
        for r in check_tripartite_suite(&basis).unwrap() {
            assert!(r.holds && r.saturated, "{}", r.name);
        }
    }

    #[test]
    fn tripartite_suite_on_random_states_and_corollary_implication() {
        for seed in 0..15u64 {
            let rank = 1 + (seed as usize % 4);
            let rho = random_density(&[2, 2, 2], rank, 100 + seed).unwrap();
            let reports = check_tripartite_suite(&rho).unwrap();
            for r in &reports {
                assert!(r.holds, "{} failed at seed {seed}", r.name);
            }
            // the triple-product and pairwise inequalities imply the
            // single-rank corollary on every instance
            let triple_ok = reports[3..6].iter().all(|r| r.holds);
            let pairwise_ok = reports[6..9].iter().all(|r| r.holds);
            let corollary_ok = reports[9..12].iter().all(|r| r.holds);
            assert!(!(triple_ok && pairwise_ok) || corollary_ok);
        }
    }

    #[test]
    fn multipartite_suite_on_product_and_ghz() {
        let product = basis_state(vec![2, 2, 2, 2], 0);
        for r in check_multipartite_suite(&product).unwrap() {
            assert!(r.holds, "{}", r.name);
        }

        let reports = check_multipartite_suite(&ghz(4)).unwrap();
        for r in &reports {
            assert!(r.holds, "{}", r.name);
        }
        // the n = 4 leave-one-out triple product reads 2*2*2 >= 2
        let triple = reports
            .iter()
            .find(|r| r.name == "r(ABC)*r(ABD)*r(ACD) >= r(BCD)")
            .expect("triple product present for n = 4");
        assert_eq!((triple.lhs, triple.rhs), (8, 2));

        assert_eq!(
            check_multipartite_suite(&ghz(3)).unwrap().len(),
            4,
            "n = 3 omits the arity-4 and arity-5 inequalities"
        );
        assert!(check_multipartite_suite(&pair_state(2)).is_err());
    }

    #[test]
    fn saturation_examples_agree() {
        // basis state under the pure-state condition: both sides true
        let basis = basis_state(vec![2, 2, 2], 0);
        let rep = check_saturation(&basis, SaturationClass::Pure).unwrap();
        assert!(rep.condition_holds && rep.equality_holds && rep.agree());

        // GHZ under the pure-state condition: both sides false
        let rep = check_saturation(&ghz(3), SaturationClass::Pure).unwrap();
        assert!(!rep.condition_holds && !rep.equality_holds && rep.agree());

        // claiming a product structure that is absent must error
        assert!(check_saturation(&ghz(3), SaturationClass::ProductAxBc).is_err());
    }

    #[test]
    fn marginal_check_passes_on_extracted_marginals() {
        let rho = random_density(&[2, 2, 2], 3, 77).unwrap();
        let ab = rho.partial_trace(&[0, 1]).unwrap();
        let ac = rho.partial_trace(&[0, 2]).unwrap();
        let bc = rho.partial_trace(&[1, 2]).unwrap();
        let report = marginal_necessary_check(&ab, &ac, &bc).unwrap();
        assert!(report.marginals_consistent.iter().all(|&c| c));
        assert!(report.joint_state_possible);
    }

    #[test]
    fn marginal_check_detects_the_rank_obstruction() {
        let ab = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        let pair = pair_state(2);
        let report = marginal_necessary_check(&ab, &pair, &pair).unwrap();
        assert!(report.marginals_consistent.iter().all(|&c| c));
        assert_eq!(report.input_ranks, [4, 1, 1]);
        assert!(!report.joint_state_possible);
        let violated = report.rank_checks.iter().find(|r| !r.holds).unwrap();
        assert_eq!(violated.name, "r(AC)*r(BC) >= r(AB)");
    }

    #[test]
    fn marginal_check_rejects_dimension_mismatch() {
        let ab = DensityMatrix::maximally_mixed(vec![2, 3]).unwrap();
        let ac = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        let bc = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(marginal_necessary_check(&ab, &ac, &bc).is_err());
    }
}
