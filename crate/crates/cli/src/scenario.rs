//! Scenario files: schema, parsing with field context, and name resolution.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vne_core::multiplier::{random_multiplier, random_positive_definite};
use vne_core::vna::CMatrix;
use vne_core::{
    build_diagonal_coupling, build_group, build_me_product_coupling, build_wstar_coupling, induction_kernel,
    AlgebraElement, AlgebraShape, CouplingRecord, FiniteGroup, GroupFunction, GroupSpec, InductionKernel, TraceAction,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupSpec>,
    #[serde(default)]
    pub couplings: BTreeMap<String, CouplingSpec>,
    #[serde(default)]
    pub multipliers: BTreeMap<String, MultiplierSpec>,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Interior-point stopping tolerance.
    pub sdp: f64,
    /// Slack allowed in asserted inequalities.
    pub verify: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sdp: vne_core::SDP_TOL,
            verify: 1e-6,
            max_iter: 200,
        }
    }
}

/// A group given by name (a key of `groups`) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Name(String),
    Spec(GroupSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingSpec {
    Diagonal {
        group: GroupRef,
    },
    MeProduct {
        gamma: GroupRef,
        lambda: GroupRef,
    },
    Wstar {
        gamma: GroupRef,
        lambda: GroupRef,
        #[serde(default)]
        pairing: Option<Vec<usize>>,
    },
    Explicit {
        gamma: GroupRef,
        lambda: GroupRef,
        shape: AlgebraShape,
        gamma_action: ActionData,
        lambda_action: ActionData,
        q: NestedElement,
        p: NestedElement,
    },
}

/// Per group element: the block permutation and one unitary per target block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionData {
    pub perms: Vec<Vec<usize>>,
    pub unitaries: Vec<NestedElement>,
}

/// Blocks of `[re, im]` rows.
pub type NestedElement = Vec<Vec<Vec<[f64; 2]>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiplierSpec {
    Delta {
        group: GroupRef,
        at: usize,
    },
    Constant {
        group: GroupRef,
        value: [f64; 2],
    },
    Explicit {
        group: GroupRef,
        values: Vec<[f64; 2]>,
    },
    Random {
        group: GroupRef,
        seed: u64,
        #[serde(default)]
        positive_definite: bool,
    },
}

impl MultiplierSpec {
    fn group(&self) -> &GroupRef {
        match self {
            Self::Delta { group, .. }
            | Self::Constant { group, .. }
            | Self::Explicit { group, .. }
            | Self::Random { group, .. } => group,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KoopmanSide {
    Gamma,
    Lambda,
    Both,
}

fn both() -> KoopmanSide {
    KoopmanSide::Both
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Norm {
        multiplier: String,
    },
    Induce {
        coupling: String,
        multiplier: String,
    },
    Verify {
        coupling: String,
        multiplier: String,
    },
    Kernel {
        coupling: String,
    },
    KoopmanCheck {
        coupling: String,
        #[serde(default = "both")]
        side: KoopmanSide,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Norm { .. } => "norm",
            Self::Induce { .. } => "induce",
            Self::Verify { .. } => "verify",
            Self::Kernel { .. } => "kernel",
            Self::KoopmanCheck { .. } => "koopman_check",
        }
    }
}

/// Parses JSON text; errors carry the field path and line/column.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        CliError::Input(format!(
            "at `{}` (line {}, column {}): {}",
            e.path(),
            inner.line(),
            inner.column(),
            inner
        ))
    })?;
    de.end().map_err(|e| CliError::Input(format!("trailing content: {e}")))?;
    if scenario.schema != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "unsupported schema {} (expected {SCHEMA_VERSION})",
            scenario.schema
        )));
    }
    Ok(scenario)
}

/// Scenario with every name resolved and every object built.
pub struct Resolved {
    pub couplings: BTreeMap<String, (CouplingRecord, InductionKernel)>,
    pub multipliers: BTreeMap<String, GroupFunction>,
}

fn input<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{ctx}: {e}"))
}

struct Groups<'a> {
    named: &'a BTreeMap<String, GroupSpec>,
    cache: BTreeMap<String, FiniteGroup>,
}

impl Groups<'_> {
    fn get(&mut self, r: &GroupRef, ctx: &str) -> Result<FiniteGroup, CliError> {
        match r {
            GroupRef::Spec(spec) => build_group(spec).map_err(input(ctx)),
            GroupRef::Name(name) => {
                if let Some(g) = self.cache.get(name) {
                    return Ok(g.clone());
                }
                let spec = self
                    .named
                    .get(name)
                    .ok_or_else(|| CliError::Input(format!("{ctx}: unknown group `{name}`")))?;
                let g = build_group(spec).map_err(input(ctx))?;
                self.cache.insert(name.clone(), g.clone());
                Ok(g)
            }
        }
    }
}

fn matrices(data: &NestedElement, ctx: &str) -> Result<Vec<CMatrix>, CliError> {
    data.iter()
        .map(|rows| {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Input(format!("{ctx}: unitary is not square")));
            }
            Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
        })
        .collect()
}

fn action(group: FiniteGroup, shape: &AlgebraShape, data: &ActionData, ctx: &str) -> Result<TraceAction, CliError> {
    let unitaries = data
        .unitaries
        .iter()
        .map(|u| matrices(u, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    TraceAction::new(group, shape.clone(), data.perms.clone(), unitaries).map_err(input(ctx))
}

fn build_coupling(name: &str, spec: &CouplingSpec, groups: &mut Groups) -> Result<CouplingRecord, CliError> {
    let ctx = format!("coupling `{name}`");
    let c = match spec {
        CouplingSpec::Diagonal { group } => build_diagonal_coupling(&groups.get(group, &ctx)?),
        CouplingSpec::MeProduct { gamma, lambda } => {
            build_me_product_coupling(&groups.get(gamma, &ctx)?, &groups.get(lambda, &ctx)?)
        }
        CouplingSpec::Wstar { gamma, lambda, pairing } => build_wstar_coupling(
            &groups.get(gamma, &ctx)?,
            &groups.get(lambda, &ctx)?,
            pairing.as_deref(),
        ),
        CouplingSpec::Explicit {
            gamma,
            lambda,
            shape,
            gamma_action,
            lambda_action,
            q,
            p,
        } => {
            shape.validate().map_err(input(&ctx))?;
            let ga = action(groups.get(gamma, &ctx)?, shape, gamma_action, &ctx)?;
            let la = action(groups.get(lambda, &ctx)?, shape, lambda_action, &ctx)?;
            let q = AlgebraElement::from_nested(shape, q).map_err(input(&ctx))?;
            let p = AlgebraElement::from_nested(shape, p).map_err(input(&ctx))?;
            CouplingRecord::new(name, ga, la, q, p)
        }
    };
    c.map_err(input(&ctx))
}

fn build_multiplier(
    name: &str,
    spec: &MultiplierSpec,
    seed: Option<u64>,
    groups: &mut Groups,
) -> Result<GroupFunction, CliError> {
    let ctx = format!("multiplier `{name}`");
    let g = groups.get(spec.group(), &ctx)?;
    let c = |v: &[f64; 2]| Complex64::new(v[0], v[1]);
    match spec {
        MultiplierSpec::Delta { at, .. } => {
            if *at >= g.order() {
                return Err(CliError::Input(format!("{ctx}: element {at} outside a group of order {}", g.order())));
            }
            Ok(GroupFunction::delta(&g, *at))
        }
        MultiplierSpec::Constant { value, .. } => Ok(GroupFunction::constant(&g, c(value))),
        MultiplierSpec::Explicit { values, .. } => {
            GroupFunction::new(g, values.iter().map(c).collect()).map_err(input(&ctx))
        }
        MultiplierSpec::Random {
            seed: stream,
            positive_definite,
            ..
        } => {
            let base = seed.ok_or_else(|| CliError::Input(format!("{ctx}: random multipliers need a scenario seed")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(base);
            rng.set_stream(*stream);
            Ok(if *positive_definite {
                random_positive_definite(&g, &mut rng)
            } else {
                random_multiplier(&g, &mut rng)
            })
        }
    }
}

/// Builds every object and checks that each task's names resolve.
pub fn resolve(s: &Scenario, seed: Option<u64>) -> Result<Resolved, CliError> {
    let mut groups = Groups {
        named: &s.groups,
        cache: BTreeMap::new(),
    };
    let mut couplings = BTreeMap::new();
    for (name, spec) in &s.couplings {
        let c = build_coupling(name, spec, &mut groups)?;
        let k = induction_kernel(&c);
        couplings.insert(name.clone(), (c, k));
    }
    let mut multipliers = BTreeMap::new();
    for (name, spec) in &s.multipliers {
        multipliers.insert(name.clone(), build_multiplier(name, spec, seed, &mut groups)?);
    }
    for (i, task) in s.tasks.iter().enumerate() {
        let (c, m) = match task {
            Task::Norm { multiplier } => (None, Some(multiplier)),
            Task::Induce { coupling, multiplier } | Task::Verify { coupling, multiplier } => {
                (Some(coupling), Some(multiplier))
            }
            Task::Kernel { coupling } | Task::KoopmanCheck { coupling, .. } => (Some(coupling), None),
        };
        if let Some(c) = c.filter(|c| !couplings.contains_key(*c)) {
            return Err(CliError::Input(format!("task {i}: unknown coupling `{c}`")));
        }
        if let Some(m) = m.filter(|m| !multipliers.contains_key(*m)) {
            return Err(CliError::Input(format!("task {i}: unknown multiplier `{m}`")));
        }
        if let (Some(c), Some(m)) = (c, m) {
            if matches!(task, Task::Induce { .. } | Task::Verify { .. })
                && multipliers[m].group() != couplings[c].0.lambda()
            {
                return Err(CliError::Input(format!(
                    "task {i}: multiplier `{m}` lives on {}, coupling `{c}` induces from {}",
                    multipliers[m].group().name(),
                    couplings[c].0.lambda().name()
                )));
            }
        }
    }
    Ok(Resolved { couplings, multipliers })
}
