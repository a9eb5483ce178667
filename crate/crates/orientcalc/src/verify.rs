//! Replay of the identity suite for a chosen formal group law: every
//! closed-form identity the library implements is recomputed by independent
//! routes and compared exactly. Used by the `verify` CLI command; the
//! acceptance tests exercise the same identities with frozen expected
//! values.

use std::time::Instant;

use num::Zero;

use crate::chern::BundleData;
use crate::cobordism::{
    blowup_dropped_matrix, blowup_unit_check, divisor_pullback_check,
    f_intersection_multiplicity, pn_class_det, pn_class_recurrence, pn_class_series,
};
use crate::duality::{
    delta_star_matrix, dual_matrix, eta_coeffs, eta_prime_coeffs, fundamental_relation_check,
    pairing_gram, pi_star_matrix,
};
use crate::error::Result;
use crate::fgl::{FormalGroupLaw, UnivariateSeries};
use crate::projspace::{
    diagonal_class_closed, diagonal_class_direct, thom_class, CohomologyModel, ThomRoute,
};
use crate::ring::{rat, Variable};

/// Outcome of one identity check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

impl CheckResult {
    fn run(name: &str, body: impl FnOnce() -> Result<()>) -> CheckResult {
        let start = Instant::now();
        let outcome = body();
        CheckResult {
            name: name.to_string(),
            passed: outcome.is_ok(),
            detail: match outcome {
                Ok(()) => "ok".to_string(),
                Err(e) => e.to_string(),
            },
            millis: start.elapsed().as_millis(),
        }
    }
}

fn ensure(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(crate::error::Error::Config(msg.to_string()))
    }
}

/// Largest `n` the law's table supports across the suite.
pub fn feasible_bound(f: &FormalGroupLaw) -> u32 {
    if f.is_exact() {
        12
    } else {
        f.degree_bound().saturating_sub(1)
    }
}

/// Run every identity up to size `max_n` (clamped per identity to its own
/// feasibility), returning one result per identity.
pub fn run_suite(f: &FormalGroupLaw, max_n: u32) -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(CheckResult::run("fgl axioms (unit, symmetry, associativity)", || {
        let violations = f.check_axioms()?;
        ensure(violations.is_empty(), &format!("{} violations", violations.len()))
    }));

    out.push(CheckResult::run("formal inverse: F(x, m(x)) = 0", || {
        let m = f.formal_inverse()?;
        let x = UnivariateSeries::identity(f.coeff_ring(), f.degree_bound());
        ensure(f.apply_to_series(&x, &m)?.is_zero(), "nonzero composite")
    }));

    out.push(CheckResult::run("n-series additivity on samples", || {
        for (r, s) in [(2i64, 3i64), (-1, 4), (5, -2), (-3, -2)] {
            let lhs = f.n_series(r + s)?;
            let rhs = f.apply_to_series(&f.n_series(r)?, &f.n_series(s)?)?;
            ensure(lhs.sub(&rhs)?.is_zero(), &format!("r={r} s={s}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("pn classes: three routes agree", || {
        let a = pn_class_recurrence(f, max_n)?;
        let b = pn_class_series(f, max_n)?;
        let c = pn_class_det(f, max_n)?;
        ensure(a == b, "recurrence != series")?;
        ensure(a == c, "recurrence != determinant")
    }));

    out.push(CheckResult::run("myschenko sum vanishes", || {
        let table = pn_class_recurrence(f, max_n)?;
        for n in 1..=max_n {
            let mut acc = f.coeff_ring().zero();
            for i in 0..=n {
                let a = if i == 0 { f.coeff_ring().one() } else { f.coeff(1, i)? };
                acc = acc.add(&a.mul(table.class((n - i) as usize))?)?;
            }
            ensure(acc.is_zero(), &format!("n={n}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("p(x) * omega(x) = 1", || {
        let p = pn_class_series(f, max_n)?;
        let omega = f.omega_series()?;
        let mut ps = UnivariateSeries::zero(f.coeff_ring(), max_n);
        ps.coeffs = p.classes.clone();
        let prod = ps.mul(&omega)?;
        ensure(prod.get(0).is_one(), "constant term")?;
        for k in 1..=max_n as usize {
            ensure(prod.get(k).is_zero(), &format!("degree {k}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("fundamental relation", || {
        for n in 0..=max_n {
            ensure(fundamental_relation_check(f, n)?.is_zero(), &format!("n={n}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("M_n * M_n^-1 = I", || {
        for n in 0..=max_n {
            let m = dual_matrix(f, n)?;
            ensure(m.is_symmetric(), &format!("M_{n} not symmetric"))?;
            ensure(m.mul(&m.invert()?)?.is_identity(), &format!("n={n}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("eta'_n = [P^n]", || {
        let table = pn_class_recurrence(f, max_n)?;
        let primes = eta_prime_coeffs(f, max_n)?;
        for (n, prime) in primes.iter().enumerate() {
            ensure(prime == table.class(n), &format!("n={n}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("delta* . pi* = I", || {
        for n in 0..=max_n.min(4) {
            let prod = delta_star_matrix(f, n)?.mul(&pi_star_matrix(f, n)?)?;
            ensure(prod.is_identity(), &format!("n={n}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("pairing gram: symmetric, det = +-1", || {
        for n in 0..=max_n {
            let g = pairing_gram(f, n)?;
            let det = g.determinant()?;
            let one = f.coeff_ring().one();
            ensure(det == one || det == one.neg(), &format!("n={n}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("diagonal class: closed = direct", || {
        for n in 0..=max_n.min(3) {
            let (_, closed) = diagonal_class_closed(f, n)?;
            let (_, direct) = diagonal_class_direct(f, n)?;
            ensure(closed == direct, &format!("n={n}"))?;
            ensure(
                closed.is_homogeneous_of(n as i64),
                &format!("weight at n={n}"),
            )?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("thom class: three routes agree", || {
        let max_rank = if f.is_exact() { 4 } else { 3 };
        for rank in 1..=max_rank.min(max_n.max(1)) {
            let vars: Vec<Variable> = (1..=rank)
                .map(|i| Variable::nilpotent(format!("x{i}"), 1, 2))
                .collect();
            let base = f.coeff_ring().extend(vars)?;
            let roots = (1..=rank)
                .map(|i| base.var(&format!("x{i}")))
                .collect::<Result<Vec<_>>>()?;
            let bundle = BundleData::from_roots(&base, roots)?;
            let model = CohomologyModel::thom(&bundle, "xi")?;
            let relation = thom_class(f, &model, ThomRoute::Relation)?;
            let twist = thom_class(f, &model, ThomRoute::Twist)?;
            let quotient = thom_class(f, &model, ThomRoute::Quotient)?;
            ensure(relation == twist, &format!("relation != twist at rank {rank}"))?;
            ensure(
                relation == quotient,
                &format!("relation != quotient at rank {rank}"),
            )?;
            ensure(
                relation.is_homogeneous_of(rank as i64),
                &format!("weight at rank {rank}"),
            )?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("intersection multiplicity", || {
        let base = f
            .coeff_ring()
            .extend(vec![Variable::nilpotent("nu", 1, 3)])?;
        let nu = base.var("nu")?;
        for r in 1..=5 {
            let rho = f_intersection_multiplicity(f, r, &nu)?;
            ensure(rho.augmentation() == rat(r), &format!("augmentation r={r}"))?;
        }
        let report = divisor_pullback_check(f, 3, 3)?;
        ensure(report.passed, "divisor pullback")
    }));

    out.push(CheckResult::run("blow-up matrices", || {
        for n in 1..=max_n.min(5) {
            let det = blowup_dropped_matrix(f, n)?.determinant()?;
            ensure(
                !det.augmentation().is_zero(),
                &format!("determinant not a unit at n={n}"),
            )?;
        }
        for d in 0..=3u32 {
            let v = blowup_unit_check(f, d)?;
            ensure(v.augmentation() == rat(1), &format!("p_*(e) at d={d}"))?;
        }
        Ok(())
    }));

    out.push(CheckResult::run("weight audit", || {
        let table = pn_class_recurrence(f, max_n)?;
        for n in 0..=max_n as usize {
            ensure(
                table.class(n).is_homogeneous_of(-(n as i64)),
                &format!("[P^{n}]"),
            )?;
        }
        let etas = eta_coeffs(f, max_n)?;
        let primes = eta_prime_coeffs(f, max_n)?;
        for i in 0..=max_n as usize {
            ensure(etas[i].is_homogeneous_of(-(i as i64)), &format!("eta_{i}"))?;
            ensure(primes[i].is_homogeneous_of(-(i as i64)), &format!("eta'_{i}"))?;
        }
        Ok(())
    }));

    out
}
