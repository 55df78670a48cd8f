use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use vne_core::multiplier::{b2_norm_certified, min_gram_eigenvalue, q_norm_certified};
use vne_core::{
    coupling_index, exact_index, induce_multiplier, koopman, verify_lemma, GroupFunction, InductionKernel,
    TraceAction, STRUCTURAL_TOL,
};
use vne_sdp::SdpOptions;

use crate::report::{round12, round_value, Report, ScenarioInfo, Summary, TaskCheck, TaskReport, ToolInfo};
use crate::scenario::{parse_scenario, resolve, KoopmanSide, Resolved, Task, Tolerances};
use crate::CliError;

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub no_timestamp: bool,
}

fn pairs(values: &[Complex64]) -> Value {
    Value::Array(values.iter().map(|z| json!([z.re, z.im])).collect())
}

fn check(name: &str, value: f64, threshold: f64) -> TaskCheck {
    TaskCheck {
        name: name.into(),
        value: round12(value),
        threshold: round12(threshold),
        pass: value <= threshold,
    }
}

fn failed_check(name: &str) -> TaskCheck {
    TaskCheck {
        name: name.into(),
        value: None,
        threshold: None,
        pass: false,
    }
}

struct Ctx<'a> {
    resolved: &'a Resolved,
    tol: Tolerances,
    sdp: SdpOptions,
}

#[derive(Default)]
struct Outcome {
    label: Option<String>,
    values: BTreeMap<String, Value>,
    checks: Vec<TaskCheck>,
    notes: Vec<String>,
    solver_failures: Vec<String>,
    error: Option<String>,
}

impl Outcome {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }
}

fn norm_task(ctx: &Ctx, phi: &GroupFunction, out: &mut Outcome) {
    let sup = phi.sup_norm();
    out.put("sup", sup);
    out.put("min_gram_eigenvalue", min_gram_eigenvalue(phi));
    out.put("positive_definite", min_gram_eigenvalue(phi) >= -ctx.tol.verify);
    match b2_norm_certified(phi, &ctx.sdp) {
        Ok(c) => {
            out.put("b2", c.value);
            out.put("b2_gap", c.stats.gap);
            out.put("b2_iterations", c.stats.iterations);
            out.checks.push(check("sup_le_b2", sup - c.value, ctx.tol.verify));
        }
        Err(e) => {
            out.solver_failures.push(format!("b2 norm: {e}"));
            out.checks.push(failed_check("sup_le_b2"));
        }
    }
    match q_norm_certified(phi, &ctx.sdp) {
        Ok(c) => {
            out.put("q", c.value);
            out.put("q_gap", c.stats.gap);
            out.put("q_iterations", c.stats.iterations);
        }
        Err(e) => out.solver_failures.push(format!("q norm: {e}")),
    }
}

fn kernel_values(k: &InductionKernel, out: &mut Outcome) {
    if let Some(p) = k.pairing() {
        out.put("pairing", p.to_vec());
    }
}

fn kernel_task(k: &InductionKernel, out: &mut Outcome) {
    let rows: Vec<Vec<f64>> = (0..k.gamma().order()).map(|g| k.row(g)).collect();
    out.put("kernel", json!(rows));
    out.put("min_entry", k.min_entry());
    out.put("row_sum_defect", k.row_sum_defect());
    out.put("trace_form_defect", k.trace_form_defect());
    out.put("index", coupling_index(k.coupling()));
    if let Some(r) = exact_index(k.coupling()) {
        out.put("exact_index", json!([r.numer(), r.denom()]));
    }
    kernel_values(k, out);
    out.checks.push(check("nonnegative_entries", -k.min_entry(), 1e-12));
    out.checks.push(check("row_sums", k.row_sum_defect(), 1e-10));
    out.checks.push(check("trace_forms_agree", k.trace_form_defect(), 1e-12));
}

fn koopman_side(name: &str, a: &TraceAction, out: &mut Outcome) {
    let u = koopman(a);
    let chi = u.character();
    let nontrivial = chi.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    out.put(&format!("{name}.character"), pairs(&chi));
    out.put(&format!("{name}.max_nontrivial_trace"), nontrivial);
    let defects = [
        ("unitarity", u.unitarity_defect()),
        ("homomorphism", u.homomorphism_defect(a.group())),
        ("implementation", u.implementation_defect(a)),
    ];
    for (what, d) in defects {
        out.put(&format!("{name}.{what}_defect"), d);
        out.checks.push(check(&format!("{name}.{what}"), d, STRUCTURAL_TOL));
    }
    out.checks.push(check(&format!("{name}.regular"), nontrivial, 1e-8));
}

fn verify_task(ctx: &Ctx, k: &InductionKernel, phi: &GroupFunction, out: &mut Outcome) {
    match verify_lemma(k, phi, ctx.tol.verify, &ctx.sdp) {
        Ok(r) => {
            let opt = |x: Option<f64>| x.map_or(Value::Null, Value::from);
            out.put("b2_phi", opt(r.b2_phi));
            out.put("b2_phi_hat", opt(r.b2_phi_hat));
            out.put("contractivity_margin", opt(r.contractivity_margin));
            out.put("min_gram_phi", r.min_gram_phi);
            out.put("min_gram_phi_hat", r.min_gram_phi_hat);
            out.put("phi_e", json!(r.phi_e));
            out.put("phi_hat_e", json!(r.phi_hat_e));
            out.put("phi_hat", json!(r.phi_hat));
            kernel_values(k, out);
            out.checks.extend(r.checks.iter().map(|c| {
                if c.value.is_finite() {
                    TaskCheck {
                        name: c.name.clone(),
                        value: round12(c.value),
                        threshold: round12(c.threshold),
                        pass: c.pass,
                    }
                } else {
                    failed_check(&c.name)
                }
            }));
            out.solver_failures.extend(r.solver_failures);
            out.notes.extend(r.skipped);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
}

fn execute(ctx: &Ctx, task: &Task) -> Outcome {
    let r = ctx.resolved;
    let mut out = Outcome::default();
    let kernel = |name: &String| &r.couplings[name].1;
    match task {
        Task::Norm { multiplier } => norm_task(ctx, &r.multipliers[multiplier], &mut out),
        Task::Induce { coupling, multiplier } => {
            let k = kernel(coupling);
            let phi = &r.multipliers[multiplier];
            match induce_multiplier(k, phi) {
                Ok(hat) => {
                    out.put("phi", pairs(phi.values()));
                    out.put("phi_hat", pairs(hat.values()));
                    kernel_values(k, &mut out);
                }
                Err(e) => out.error = Some(e.to_string()),
            }
        }
        Task::Verify { coupling, multiplier } => verify_task(ctx, kernel(coupling), &r.multipliers[multiplier], &mut out),
        Task::Kernel { coupling } => kernel_task(kernel(coupling), &mut out),
        Task::KoopmanCheck { coupling, side } => {
            let c = &r.couplings[coupling].0;
            if matches!(side, KoopmanSide::Gamma | KoopmanSide::Both) {
                koopman_side("gamma", c.gamma_action(), &mut out);
            }
            if matches!(side, KoopmanSide::Lambda | KoopmanSide::Both) {
                koopman_side("lambda", c.lambda_action(), &mut out);
            }
        }
    }
    if let Task::Induce { coupling, .. }
    | Task::Verify { coupling, .. }
    | Task::Kernel { coupling }
    | Task::KoopmanCheck { coupling, .. } = task
    {
        out.label = Some(r.couplings[coupling].0.label().to_string());
    }
    out
}

pub fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Parses, resolves and executes a scenario. Tasks run concurrently; the
/// report lists them in file order.
pub fn run_scenario_text(text: &str, ov: &Overrides) -> Result<Report, CliError> {
    let scenario = parse_scenario(text)?;
    let seed = ov.seed.or(scenario.seed);
    let mut tol = scenario.tolerances;
    if let Some(t) = ov.tol {
        tol.verify = t;
    }
    if let Some(m) = ov.max_iter {
        tol.max_iter = m;
    }
    if !(tol.sdp > 0.0 && tol.verify >= 0.0 && tol.max_iter > 0) {
        return Err(CliError::Input(format!("invalid tolerances {tol:?}")));
    }
    let resolved = resolve(&scenario, seed)?;
    let ctx = Ctx {
        resolved: &resolved,
        tol,
        sdp: SdpOptions {
            tol: tol.sdp,
            max_iter: tol.max_iter,
            ..SdpOptions::default()
        },
    };
    let tasks: Vec<TaskReport> = scenario
        .tasks
        .par_iter()
        .enumerate()
        .map(|(index, task)| {
            let start = Instant::now();
            let o = execute(&ctx, task);
            let elapsed = start.elapsed().as_secs_f64();
            let pass = o.error.is_none() && o.solver_failures.is_empty() && o.checks.iter().all(|c| c.pass);
            TaskReport {
                index,
                task: task.clone(),
                coupling_label: o.label,
                values: o.values.into_iter().map(|(k, v)| (k, round_value(v))).collect(),
                checks: o.checks,
                notes: o.notes,
                solver_failures: o.solver_failures,
                error: o.error,
                pass,
                wall_clock_s: (!ov.no_timestamp).then(|| round12(elapsed).unwrap_or(0.0)),
            }
        })
        .collect();
    let passed = tasks.iter().filter(|t| t.pass).count();
    let summary = Summary {
        tasks: tasks.len(),
        passed,
        failed: tasks.len() - passed,
        solver_failures: tasks.iter().filter(|t| !t.solver_failures.is_empty()).count(),
    };
    Ok(Report {
        tool: ToolInfo {
            name: "vne".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        scenario: ScenarioInfo {
            name: scenario.name.clone(),
            digest: digest(text),
        },
        seed,
        tolerances: tol,
        generated_at: (!ov.no_timestamp).then(|| chrono::Utc::now().to_rfc3339()),
        tasks,
        summary,
    })
}

pub fn run_scenario(path: &std::path::Path, ov: &Overrides) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    run_scenario_text(&text, ov).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}
