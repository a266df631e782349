//! Named bundles of checks, built as independent jobs so a caller can fan
//! them out over a worker pool.

use rand::Rng;

use super::*;
use crate::games::random_interior_2x2;
use crate::rng::stream;

/// One self-contained certification job.
pub struct SuiteItem {
    pub name: String,
    pub job: Box<dyn Fn() -> CheckReport + Send + Sync>,
}

impl SuiteItem {
    fn new(name: impl Into<String>, job: impl Fn() -> Result<CheckReport> + Send + Sync + 'static) -> Self {
        let name = name.into();
        let label = name.clone();
        Self {
            name,
            job: Box::new(move || match job() {
                Ok(r) => r,
                Err(e) => {
                    let mut r = CheckReport::new(label.clone(), "n/a");
                    r.fail(0, format!("check could not run: {e}"));
                    r
                }
            }),
        }
    }

    pub fn run(&self) -> CheckReport {
        (self.job)()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Number of random games or states drawn by sampling checks.
    pub samples: usize,
    /// Overrides the default horizon of trajectory and lower-bound checks.
    pub horizon: Option<usize>,
    /// Runs trajectory checks on this family instead of the default sample.
    pub family: Option<InstanceFamily>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 100, horizon: None, family: None }
    }
}

pub const SUITES: [&str; 8] = ["dissipation", "domination", "rates", "lower_bounds", "stability", "drift", "chain", "all"];

/// The jobs of the named suite.
pub fn build_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<SuiteItem>> {
    let items = match name {
        "dissipation" => dissipation(opts),
        "domination" => domination(opts),
        "rates" => rates(opts),
        "lower_bounds" => lower_bounds(opts),
        "stability" => stability(opts),
        "drift" => drift(opts),
        "chain" => chain(opts),
        "all" => {
            let mut all = Vec::new();
            for s in &SUITES[..SUITES.len() - 1] {
                all.extend(build_suite(s, opts)?);
            }
            all
        }
        other => return Err(Error::Config(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", ")))),
    };
    Ok(items)
}

fn random_init<R: Rng>(rng: &mut R, m: usize, n: usize) -> JointStrategy {
    random_strategy(rng, m, n, 2.0)
}

/// Runs `check` on `samples` random 2×2 games (or on the override family) and
/// merges the reports.
fn over_games(
    id: &'static str,
    opts: &SuiteOptions,
    horizon: usize,
    eta_of: fn(&Game) -> f64,
    check: fn(&Trajectory) -> Result<CheckReport>,
) -> SuiteItem {
    let (seed, samples, family) = (opts.seed, opts.samples, opts.family);
    SuiteItem::new(id, move || {
        let mut merged = CheckReport::new(id, family.as_ref().map_or("random_2x2".to_string(), |f| f.tag().to_string()));
        merged.param("horizon", horizon as f64);
        let games: Vec<(Game, JointStrategy)> = match &family {
            Some(f) => {
                let inst = make_instance::<f64>(f)?;
                vec![(inst.game(), inst.init)]
            }
            None => (0..samples)
                .map(|i| {
                    let mut rng = stream(seed, i as u64);
                    let (g, _) = random_interior_2x2(&mut rng);
                    let w0 = random_init(&mut rng, 2, 2);
                    (g, w0)
                })
                .collect(),
        };
        for (i, (g, w0)) in games.iter().enumerate() {
            let eta = eta_of(g);
            let traj = run(g, &SimConfig::new(w0.clone(), eta, horizon).enforce(false))?;
            let r = check(&traj)?;
            merged.absorb(&format!("game{i}"), &r);
        }
        Ok(merged)
    })
}

fn max_eta(g: &Game) -> f64 {
    max_stepsize(&g.matrix)
}

fn stability_eta(g: &Game) -> f64 {
    1.0 / (21.0 * g.matrix.sigma_max())
}

fn dissipation(opts: &SuiteOptions) -> Vec<SuiteItem> {
    let h = opts.horizon.unwrap_or(500);
    let mut items = vec![
        over_games("dissipation_sandwich", opts, h, max_eta, check_dissipation_sandwich),
        over_games("kl_energy_equivalence", opts, h, max_eta, check_kl_energy_equivalence),
    ];
    if opts.family.is_none() {
        for delta in [0.1, 0.3, 0.5] {
            items.push(SuiteItem::new(format!("dissipation_sandwich.diagonal10.delta={delta}"), move || {
                let inst = make_instance::<f64>(&InstanceFamily::Diagonal10 { delta })?;
                let g = inst.game();
                let traj = run(&g, &SimConfig::new(inst.init.clone(), max_stepsize(&g.matrix), h))?;
                let mut r = check_dissipation_sandwich(&traj)?;
                r.absorb("kl_energy", &check_kl_energy_equivalence(&traj)?);
                r.instance = format!("diagonal10(delta={delta})");
                Ok(r)
            }));
        }
    }
    let (seed, samples) = (opts.seed, opts.samples.min(50));
    items.push(SuiteItem::new("mwu_contrast", move || {
        let mut merged = CheckReport::new("mwu_contrast", "random_2x2");
        for i in 0..samples {
            let mut rng = stream(seed ^ 0x5157, i as u64);
            let (g, _) = random_interior_2x2(&mut rng);
            let w0 = random_init(&mut rng, 2, 2);
            let r = check_mwu_contrast(&g, max_stepsize(&g.matrix), &w0, 200)?;
            for key in ["mwu_decrease_steps", "omwu_decrease_steps", "steps_after_first"] {
                *merged.details.entry(key.into()).or_insert(0.0) += r.details[key];
            }
            merged.absorb(&format!("game{i}"), &CheckReport { details: Default::default(), ..r });
        }
        Ok(merged)
    }));
    items
}

fn random_states(game: &Game, rng: &mut impl Rng, count: usize) -> Vec<JointStrategy> {
    (0..count).map(|_| random_strategy(rng, game.matrix.m(), game.matrix.n(), 4.0)).collect()
}

fn domination(opts: &SuiteOptions) -> Vec<SuiteItem> {
    let (seed, samples) = (opts.seed, opts.samples.max(1));
    let per_game = 10;
    let mut items = vec![SuiteItem::new("skew_grad_domination", move || {
        let mut merged = CheckReport::new("skew_grad_domination", "random_2x2");
        for i in 0..samples {
            let mut rng = stream(seed ^ 0xD0, i as u64);
            let (g, _) = random_interior_2x2(&mut rng);
            let states = random_states(&g, &mut rng, per_game);
            merged.absorb(&format!("game{i}"), &check_skew_grad_domination_batch(&g, states)?);
        }
        Ok(merged)
    })];
    items.push(SuiteItem::new("dissipation_upper", move || {
        let mut merged = CheckReport::new("dissipation_upper", "random_2x2");
        for i in 0..samples {
            let mut rng = stream(seed ^ 0xA1, i as u64);
            let (g, _) = random_interior_2x2(&mut rng);
            let states = random_states(&g, &mut rng, per_game);
            let r = check_dissipation_upper_batch(&g, states)?;
            merged.absorb(&format!("game{i}"), &CheckReport { notes: Vec::new(), ..r });
        }
        Ok(merged)
    }));
    items.push(SuiteItem::new("skew_grad_domination.scaled_mp", move || {
        let inst = make_instance::<f64>(&InstanceFamily::ScaledMp { epsilon: 0.4 })?;
        let g = inst.game();
        let mut rng = stream(seed ^ 0x3B, 0);
        let r = check_skew_grad_domination_batch(&g, random_states(&g, &mut rng, 100))?;
        Ok(r)
    }));
    items.push(SuiteItem::new("dissipation_upper.tight", move || {
        let delta = 0.05;
        let inst = make_instance::<f64>(&InstanceFamily::BoundarySym { delta })?;
        let g = inst.game();
        let mut rng = stream(seed ^ 0x71, 0);
        // log p(2), log q(2) ≤ −1/δ
        let states = (0..200).map(|_| {
            let a = -1.0 / delta - rng.gen_range(0.0..20.0);
            let b = -1.0 / delta - rng.gen_range(0.0..20.0);
            JointStrategy::from_log_probs(vec![(-a.exp()).ln_1p(), a], vec![(-b.exp()).ln_1p(), b])
        });
        let states: Result<Vec<_>> = states.collect();
        check_dissipation_upper_batch(&g, states?)
    }));
    items
}

fn rates(opts: &SuiteOptions) -> Vec<SuiteItem> {
    let h = opts.horizon.unwrap_or(2000);
    let mut items = Vec::new();
    let families: Vec<InstanceFamily> = match &opts.family {
        Some(f) => vec![*f],
        None => vec![
            InstanceFamily::BoundarySym { delta: 0.3 },
            InstanceFamily::Diagonal10 { delta: 0.3 },
        ],
    };
    for fam in families {
        let tag = fam.tag();
        let f2 = fam;
        items.push(SuiteItem::new(format!("one_step_contraction.{tag}"), move || {
            let (_, traj) = run_instance(f2, None, h)?;
            check_one_step_contraction(&traj)
        }));
        items.push(SuiteItem::new(format!("linear_rate.{tag}"), move || {
            let (_, traj) = run_instance(fam, None, h)?;
            check_linear_rate(&traj)
        }));
    }
    let t = opts.horizon.unwrap_or(20).min(crate::games::KL_LOWER_MAX_HORIZON);
    items.push(SuiteItem::new("kl_lower_rate", move || check_kl_lower_rate(t.max(3))));
    items.push(SuiteItem::new("best_iterate_dg_rate", || {
        check_best_iterate_dg_rate(&DG_RATE_DELTAS, &[100, 1_000, 10_000])
    }));
    items
}

/// `δ` values of the best-iterate duality gap fit.
pub const DG_RATE_DELTAS: [f64; 3] = [0.05, 0.2, 0.5];

fn lower_bounds(opts: &SuiteOptions) -> Vec<SuiteItem> {
    let t = opts.horizon;
    vec![
        SuiteItem::new("uniform_lower_bounds.main", move || {
            check_uniform_lower_bounds(t.unwrap_or(50), LowerBoundVariant::Main)
        }),
        SuiteItem::new("uniform_lower_bounds.kl_only", move || {
            check_uniform_lower_bounds(t.unwrap_or(20), LowerBoundVariant::KlOnly)
        }),
        SuiteItem::new("uniform_lower_bounds.dg_boundary", move || {
            check_uniform_lower_bounds(t.unwrap_or(20), LowerBoundVariant::DgBoundary)
        }),
    ]
}

fn stability(opts: &SuiteOptions) -> Vec<SuiteItem> {
    let h = opts.horizon.unwrap_or(500);
    let seed = opts.seed;
    vec![
        over_games("stability", opts, h, stability_eta, check_stability),
        SuiteItem::new("lhs_random", move || {
            let mut rng = stream(seed ^ 0x1E5, 0);
            let mut r = check_lhs_random(&mut rng, 100, 2, 2, 0.5);
            r.absorb("10x10", &check_lhs_random(&mut rng, 100, 10, 10, 0.5));
            Ok(r)
        }),
    ]
}

/// `(δp, δq, η, number of epoch lengths)` for the default drift runs.
const DRIFT_RUNS: [(f64, f64, f64, f64); 2] = [(0.1, 0.1, 0.05, 5.0), (0.05, 0.2, 0.05, 5.0)];

fn drift(opts: &SuiteOptions) -> Vec<SuiteItem> {
    DRIFT_RUNS
        .iter()
        .map(|&(dp, dq, eta, epochs)| {
            let horizon = opts.horizon;
            SuiteItem::new(format!("drift_invariants.dp={dp}.dq={dq}"), move || {
                let inst = make_instance::<f64>(&InstanceFamily::Canonical2x2 { delta_p: dp, delta_q: dq })?;
                let g = inst.game();
                let init = JointStrategy::uniform(2, 2);
                let t = horizon.unwrap_or((epochs * epoch_length(dp, dq, eta)).ceil() as usize);
                check_drift_streaming(&g, &init, eta, t)
            })
        })
        .collect()
}

fn chain(opts: &SuiteOptions) -> Vec<SuiteItem> {
    let (seed, samples) = (opts.seed, opts.samples.max(1));
    vec![SuiteItem::new("distance_chain", move || {
        let mut merged = CheckReport::new("distance_chain", "random_2x2");
        for i in 0..samples {
            let mut rng = stream(seed ^ 0xC4, i as u64);
            let (g, _) = random_interior_2x2(&mut rng);
            let pts = random_states(&g, &mut rng, 10);
            merged.absorb(&format!("game{i}"), &check_distance_chain_batch(&g, pts)?);
        }
        let d10 = make_instance::<f64>(&InstanceFamily::Diagonal10 { delta: 0.2 })?;
        let g = d10.game();
        let mut rng = stream(seed ^ 0xC5, 0);
        merged.absorb("diagonal10", &check_distance_chain_batch(&g, random_states(&g, &mut rng, 50))?);
        Ok(merged)
    })]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(build_suite("nope", &SuiteOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn small_suites_pass() {
        let opts = SuiteOptions { seed: 3, samples: 5, horizon: None, family: None };
        for name in ["chain", "domination", "lower_bounds"] {
            for item in build_suite(name, &opts).unwrap() {
                let r = item.run();
                assert!(r.pass, "{}: {}", item.name, r.summary_line());
            }
        }
    }

    #[test]
    fn all_contains_every_suite() {
        let opts = SuiteOptions { samples: 2, ..Default::default() };
        let names: Vec<String> = build_suite("all", &opts).unwrap().into_iter().map(|i| i.name).collect();
        assert!(names.iter().any(|n| n.starts_with("drift")));
        assert!(names.iter().any(|n| n == "mwu_contrast"));
        assert!(names.iter().any(|n| n == "distance_chain"));
    }
}
