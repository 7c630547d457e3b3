//! Self-checks of the whole pipeline against independent dense oracles.

use serde::{Deserialize, Serialize};

use crate::dtree::all_inputs;
use crate::experiment::{kernel_check, ExperimentError};
use crate::problems::Problem;
use crate::qsim::{dense_walk, spectral_check, ExactSpectral, Instance};
use crate::report::SCHEMA_VERSION;
use crate::spanprog::{binary_bounds, nbsp_bounds, verify_span_program, Nbsp, SpanProgram};

/// Tolerance for exact identities in dense arithmetic.
pub const IDENTITY_TOL: f64 = 1e-8;

/// A wrong target must stay at least this far from the available span.
pub const SEPARATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Only trees with `n ≤ 3`.
    pub quick: bool,
    /// Perturb one entry of M̃ before the kernel checks; they must then fail.
    pub corrupt: bool,
    pub epsilon: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            quick: false,
            corrupt: false,
            epsilon: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub subject: String,
    pub passed: bool,
    /// Worst measured deviation.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub options: SuiteOptions,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn subjects(quick: bool) -> Vec<Problem> {
    let mut v = vec![
        Problem::FirstMarked { n: 2 },
        Problem::FirstMarked { n: 3 },
        Problem::Bfs { n: 3, directed: false },
        Problem::Bipartite { n: 3 },
        Problem::Matching { n: 3 },
    ];
    if !quick {
        v.extend([
            Problem::FirstMarked { n: 5 },
            Problem::Bfs { n: 3, directed: true },
            Problem::Cycle { n: 4 },
            Problem::Matching { n: 4 },
        ]);
    }
    v
}

fn label(p: &Problem) -> String {
    format!("{} n={}", p.name(), p.n())
}

fn check(suite: &str, p: &Problem, value: f64, tolerance: f64, ok: bool, detail: String) -> CheckResult {
    CheckResult {
        suite: suite.into(),
        subject: label(p),
        passed: ok && value.is_finite(),
        value,
        tolerance,
        detail,
    }
}

fn span_checks(p: &Problem, out: &mut Vec<CheckResult>) -> Result<(), ExperimentError> {
    let f = p.build()?;
    let domain = all_inputs(f.tree.arity(), f.tree.alphabet());
    let stats = f.tree.stats();
    let (black, red) = (1.0 / stats.mistakes.max(1) as f64, 1.0 / stats.depth.max(1) as f64);

    let sp = SpanProgram::<f64>::with_default_weights(&f.tree)?;
    let r = verify_span_program(&sp, &domain)?;
    let (bp, bn) = binary_bounds(stats, black, red);
    let worst = r.max_target_residual.max(r.max_available_overlap).max(r.max_correct_target_residual);
    out.push(check(
        "span-program",
        p,
        worst,
        IDENTITY_TOL,
        worst <= IDENTITY_TOL
            && r.min_wrong_target_residual > SEPARATION_TOL
            && r.max_positive_size <= bp * (1.0 + IDENTITY_TOL)
            && r.max_negative_size <= bn * (1.0 + IDENTITY_TOL),
        format!(
            "binary: wrong-target gap {:.3e}, wsize {:.4}/{:.4} within {bp:.4}/{bn:.4}",
            r.min_wrong_target_residual, r.max_positive_size, r.max_negative_size
        ),
    ));

    let nb = Nbsp::<f64>::with_default_weights(&f.tree)?;
    let r = nb.verify(&domain)?;
    let (bp, bn) = nbsp_bounds(stats, black, red);
    let worst = r.max_target_residual.max(r.max_available_overlap).max(r.max_correct_target_residual);
    out.push(check(
        "span-program",
        p,
        worst,
        IDENTITY_TOL,
        worst <= IDENTITY_TOL
            && r.min_wrong_target_residual > SEPARATION_TOL
            && r.max_positive_size <= bp * (1.0 + IDENTITY_TOL)
            && r.max_negative_size <= bn * (1.0 + IDENTITY_TOL),
        format!(
            "non-binary: wrong-target gap {:.3e}, wsize {:.4}/{:.4} within {bp:.4}/{bn:.4}",
            r.min_wrong_target_residual, r.max_positive_size, r.max_negative_size
        ),
    ));
    Ok(())
}

fn kernel_checks(p: &Problem, opts: &SuiteOptions, out: &mut Vec<CheckResult>) -> Result<(), ExperimentError> {
    let f = p.build()?;
    for pad in [false, true] {
        let mut inst = Instance::<f64>::new(&f.tree, opts.epsilon, pad)?;
        if opts.corrupt {
            let col = inst.graph().columns().root();
            let (row, v) = inst.matrix().column(col)[0];
            inst.corrupt_matrix_entry(row, col, v + 0.5);
        }
        let k = kernel_check(&inst)?;
        out.push(check(
            "kernel",
            p,
            k.max_residual,
            IDENTITY_TOL,
            k.max_residual <= IDENTITY_TOL,
            format!("padded={pad}: basis vectors annihilated by M̃"),
        ));
        out.push(check(
            "kernel",
            p,
            k.projector_distance,
            IDENTITY_TOL,
            k.projector_distance <= IDENTITY_TOL,
            format!("padded={pad}: basis spans the SVD null space"),
        ));
        out.push(check(
            "reflection",
            p,
            k.reflection_distance,
            IDENTITY_TOL,
            k.reflection_distance <= IDENTITY_TOL,
            format!("padded={pad}: structured R_Λ equals 2P_ker − I"),
        ));
    }
    Ok(())
}

fn spectral_checks(p: &Problem, opts: &SuiteOptions, out: &mut Vec<CheckResult>) -> Result<(), ExperimentError> {
    let f = p.build()?;
    let inst = Instance::<f64>::new(&f.tree, opts.epsilon, false)?;
    let w = inst.complexity();
    let e2 = opts.epsilon * opts.epsilon;
    let thetas = [0.0, e2 / w, 2.0 * e2 / w, 5.0 * e2 / w];
    let mut worst = 0.0f64;
    let mut ok = true;
    for x in all_inputs(f.tree.arity(), f.tree.alphabet()) {
        let spec = ExactSpectral::new(&dense_walk(&inst.walk(&x)?));
        let r = spectral_check(&inst, &x, &spec, &thetas)?;
        ok &= r.holds(IDENTITY_TOL);
        worst = worst
            .max(r.zero_overlap_bound - r.zero_overlap)
            .max(r.fixed_point_residual)
            .max(r.projection_residual)
            .max(r.reflection_residual);
        for b in &r.bands {
            worst = worst.max(b.value - b.bound);
        }
    }
    out.push(check(
        "spectral",
        p,
        worst.max(0.0),
        IDENTITY_TOL,
        ok,
        "fixed point, zero-phase overlap and small-phase bands on every input".into(),
    ));
    Ok(())
}

fn frontend_checks(p: &Problem, out: &mut Vec<CheckResult>) -> Result<(), ExperimentError> {
    let f = p.build()?;
    let mut wrong = 0usize;
    let inputs = all_inputs(f.tree.arity(), f.tree.alphabet());
    for x in &inputs {
        let leaf = f.tree.evaluate(x)?.leaf;
        let label = f.tree.output(leaf).expect("evaluation ends at a leaf");
        if !f.accepts(x, f.answer(label))? {
            wrong += 1;
        }
    }
    out.push(check(
        "frontend",
        p,
        wrong as f64,
        0.0,
        wrong == 0,
        format!("{} inputs against the classical oracle", inputs.len()),
    ));
    Ok(())
}

/// Runs every check. Errors abort; failed checks are reported.
pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport, ExperimentError> {
    let mut checks = Vec::new();
    for p in subjects(opts.quick) {
        span_checks(&p, &mut checks)?;
        kernel_checks(&p, opts, &mut checks)?;
        if p.n() <= 3 {
            spectral_checks(&p, opts, &mut checks)?;
        }
        frontend_checks(&p, &mut checks)?;
    }
    Ok(SuiteReport {
        schema: SCHEMA_VERSION,
        options: *opts,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let r = run_suite(&SuiteOptions { quick: true, ..Default::default() }).unwrap();
        let bad: Vec<_> = r.failures().collect();
        assert!(r.passed, "{bad:#?}");
    }

    #[test]
    fn corrupting_the_matrix_fails_the_kernel_checks() {
        let r = run_suite(&SuiteOptions { quick: true, corrupt: true, ..Default::default() }).unwrap();
        assert!(!r.passed);
        assert!(r.failures().all(|c| c.suite == "kernel" || c.suite == "reflection"));
        assert!(r.failures().any(|c| c.suite == "kernel"));
    }
}
