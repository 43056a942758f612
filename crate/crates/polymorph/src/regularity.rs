//! Influence-regularity notions and the constructive greedy regularization
//! algorithms (junta and decision-tree variants) with their potential-function
//! guarantee.
//!
//! A function is `(d,τ)`-regular when every degree-≤d influence is at most τ,
//! and `(δ,τ)`-noisy-regular when every `ρ = 1-δ` noisy influence is at most
//! τ. The greedy algorithms repeatedly query an offending variable of every
//! irregular restriction; each round provably raises the stability potential
//! by at least `ε·δ·τ`, which caps the number of rounds at `ℓ/(ε·δ·τ)`.

use crate::boolfn::{fourier_transform, BooleanFunction, FourierExpansion, Restriction, View};
use crate::rng::CounterRng;
use crate::{Error, Result};
use serde::Serialize;

/// Exhaustive restriction averaging is used up to this many fixed
/// coordinates; beyond it the estimate switches to 10⁴ seeded draws.
const EXHAUSTIVE_RESTRICTION_LIMIT: u32 = 20;
const SAMPLED_RESTRICTION_DRAWS: u64 = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct RegularityConfig {
    /// Degree bound of the low-degree check.
    pub d: u32,
    /// Influence threshold.
    pub tau: f64,
    /// Noise parameter; the noisy check uses `ρ = 1 - δ`.
    pub delta: f64,
    /// Allowed irregular mass per bias.
    pub epsilon: f64,
    /// Product-measure biases the guarantee must hold for.
    pub biases: Vec<f64>,
}

impl RegularityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Precondition("degree bound must be ≥ 1".into()));
        }
        for (name, v) in [("tau", self.tau), ("delta", self.delta), ("epsilon", self.epsilon)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Precondition(format!("{name} = {v} outside (0,1)")));
            }
        }
        if self.biases.is_empty() {
            return Err(Error::Precondition("at least one bias is required".into()));
        }
        for &p in &self.biases {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Precondition(format!("bias {p} outside (0,1)")));
            }
        }
        Ok(())
    }

    /// Greedy round bound `ℓ/(ε·δ·τ)`.
    pub fn round_bound(&self) -> u64 {
        (self.biases.len() as f64 / (self.epsilon * self.delta * self.tau)).ceil() as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularityMode {
    LowDegree,
    Noisy,
}

/// Checks regularity of `f` under `μ_p`; on failure reports the coordinate
/// of maximum (noisy or low-degree) influence, ties to the lowest index.
pub fn regularity_check(
    f: &BooleanFunction,
    config: &RegularityConfig,
    p: f64,
    mode: RegularityMode,
) -> Result<(bool, Option<usize>)> {
    config.validate()?;
    let e = fourier_transform(f, View::PmOne, p)?;
    Ok(check_expansion(&e, config, mode))
}

fn check_expansion(
    e: &FourierExpansion,
    config: &RegularityConfig,
    mode: RegularityMode,
) -> (bool, Option<usize>) {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_i = None;
    for i in 0..e.arity() as usize {
        let inf = match mode {
            RegularityMode::LowDegree => e.low_degree_influence(i, config.d).unwrap(),
            RegularityMode::Noisy => e.noisy_influence(i, 1.0 - config.delta).unwrap(),
        };
        if inf > worst {
            worst = inf;
            worst_i = Some(i);
        }
    }
    if worst > config.tau {
        (false, worst_i)
    } else {
        (true, None)
    }
}

/// Converts low-degree parameters `(d, τ)` into noisy parameters `(δ, τ')`
/// whose satisfaction implies `(d, τ)`-regularity: `δ = 1/d` (capped at 1/2
/// for `d = 1`) and `τ' = (1-δ)^d · τ`.
pub fn noisy_to_lowdegree(config: &RegularityConfig) -> Result<RegularityConfig> {
    config.validate()?;
    let delta = if config.d == 1 { 0.5 } else { 1.0 / config.d as f64 };
    let tau = (1.0 - delta).powi(config.d as i32) * config.tau;
    Ok(RegularityConfig { delta, tau, ..config.clone() })
}

// ---- restriction trees ---------------------------------------------------------

/// A decision tree over input variables; leaves carry the accumulated
/// restriction. No variable repeats on a root-leaf path.
#[derive(Clone, Debug)]
pub enum TreeNode {
    Leaf(Restriction),
    Query { var: usize, zero: Box<TreeNode>, one: Box<TreeNode> },
}

#[derive(Clone, Debug)]
pub struct RestrictionTree {
    pub root: TreeNode,
}

impl RestrictionTree {
    pub fn trivial() -> Self {
        RestrictionTree { root: TreeNode::Leaf(Restriction::empty()) }
    }

    pub fn depth(&self) -> u32 {
        fn go(node: &TreeNode) -> u32 {
            match node {
                TreeNode::Leaf(_) => 0,
                TreeNode::Query { zero, one, .. } => 1 + go(zero).max(go(one)),
            }
        }
        go(&self.root)
    }

    pub fn leaves(&self) -> Vec<Restriction> {
        fn go(node: &TreeNode, out: &mut Vec<Restriction>) {
            match node {
                TreeNode::Leaf(r) => out.push(*r),
                TreeNode::Query { zero, one, .. } => {
                    go(zero, out);
                    go(one, out);
                }
            }
        }
        let mut out = Vec::new();
        go(&self.root, &mut out);
        out
    }

    /// Probability of reaching the leaf with this restriction under `μ_p`.
    pub fn leaf_weight(r: &Restriction, p: f64) -> f64 {
        let mut w = 1.0;
        for i in 0..32 {
            if r.fixed >> i & 1 == 1 {
                w *= if r.values >> i & 1 == 1 { p } else { 1.0 - p };
            }
        }
        w
    }

    /// Bracketed text form: `[x2 0:… 1:…]` with `leaf` at the leaves.
    pub fn to_text(&self) -> String {
        fn go(node: &TreeNode, out: &mut String) {
            match node {
                TreeNode::Leaf(_) => out.push_str("leaf"),
                TreeNode::Query { var, zero, one } => {
                    out.push_str(&format!("[x{var} 0:"));
                    go(zero, out);
                    out.push_str(" 1:");
                    go(one, out);
                    out.push(']');
                }
            }
        }
        let mut s = String::new();
        go(&self.root, &mut s);
        s
    }
}

// ---- potential and per-restriction analysis --------------------------------------

fn restricted_expansion(
    f: &BooleanFunction,
    r: &Restriction,
    p: f64,
) -> Result<FourierExpansion> {
    fourier_transform(&f.restrict(r)?, View::PmOne, p)
}

/// Enumerates `(restriction, μ_p-weight)` for all assignments to `fixed`.
fn assignments(fixed: u32, p: f64) -> Vec<(Restriction, f64)> {
    let coords: Vec<usize> = (0..32).filter(|i| fixed >> i & 1 == 1).collect();
    let k = coords.len();
    let mut out = Vec::with_capacity(1 << k);
    for bits in 0..(1u32 << k) {
        let mut values = 0u32;
        let mut w = 1.0;
        for (pos, &i) in coords.iter().enumerate() {
            if bits >> pos & 1 == 1 {
                values |= 1 << i;
                w *= p;
            } else {
                w *= 1.0 - p;
            }
        }
        out.push((Restriction { fixed, values }, w));
    }
    out
}

/// Stability potential of a junta set `T`:
/// `φ(T) = Σ_k E_{z∼μ_{p_k}} [Stab_ρ^{μ_{p_k}}(f_{T→z})]`.
pub fn stability_potential(
    f: &BooleanFunction,
    t_set: u32,
    rho: f64,
    biases: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for &p in biases {
        for (r, w) in assignments(t_set, p) {
            total += w * restricted_expansion(f, &r, p)?.stability(rho);
        }
    }
    Ok(total)
}

/// Tree analog: leaves weighted by their `μ_{p_k}` path probability.
pub fn stability_potential_tree(
    f: &BooleanFunction,
    tree: &RestrictionTree,
    rho: f64,
    biases: &[f64],
) -> Result<f64> {
    let leaves = tree.leaves();
    let mut total = 0.0;
    for &p in biases {
        for r in &leaves {
            let w = RestrictionTree::leaf_weight(r, p);
            total += w * restricted_expansion(f, r, p)?.stability(rho);
        }
    }
    Ok(total)
}

/// Two independent evaluations of the one-step stability identity:
/// `E_{a∼μ_p}[Stab_ρ(f_{i→a})]` versus `Stab_ρ(f) + (1-ρ)·NoisyInf_i`.
pub fn jones_step_identity_check(
    f: &BooleanFunction,
    i: usize,
    rho: f64,
    p: f64,
) -> Result<(f64, f64, f64)> {
    if i >= f.arity() as usize {
        return Err(Error::IndexOutOfRange { index: i, arity: f.arity() });
    }
    let s0 = restricted_expansion(f, &Restriction::new(1 << i, 0)?, p)?.stability(rho);
    let s1 = restricted_expansion(f, &Restriction::new(1 << i, 1 << i)?, p)?.stability(rho);
    let lhs = (1.0 - p) * s0 + p * s1;
    let e = fourier_transform(f, View::PmOne, p)?;
    let rhs = e.stability(rho) + (1.0 - rho) * e.noisy_influence(i, rho)?;
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

// ---- greedy algorithms -----------------------------------------------------------

/// Per-bias fraction of restriction mass whose restricted function passes
/// the noisy-regularity check. Exhaustive when the restriction has at most
/// [`EXHAUSTIVE_RESTRICTION_LIMIT`] fixed coordinates, seeded sampling after.
pub fn regular_fraction(
    f: &BooleanFunction,
    t_set: u32,
    config: &RegularityConfig,
    p: f64,
    seed: u64,
) -> Result<f64> {
    let mut regular = 0.0;
    if t_set.count_ones() <= EXHAUSTIVE_RESTRICTION_LIMIT {
        for (r, w) in assignments(t_set, p) {
            let e = restricted_expansion(f, &r, p)?;
            if check_expansion(&e, config, RegularityMode::Noisy).0 {
                regular += w;
            }
        }
    } else {
        let mut rng = CounterRng::new(seed, 0x5a);
        for _ in 0..SAMPLED_RESTRICTION_DRAWS {
            let mut values = 0u32;
            for i in 0..32 {
                if t_set >> i & 1 == 1 && rng.next_bool(p) {
                    values |= 1 << i;
                }
            }
            let e = restricted_expansion(f, &Restriction { fixed: t_set, values }, p)?;
            if check_expansion(&e, config, RegularityMode::Noisy).0 {
                regular += 1.0;
            }
        }
        regular /= SAMPLED_RESTRICTION_DRAWS as f64;
    }
    Ok(regular)
}

/// Outcome of a greedy regularization run.
#[derive(Clone, Debug, Serialize)]
pub struct JonesReport {
    pub rounds: u32,
    pub depth: u32,
    /// Junta variant: the selected variable set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub junta: Option<Vec<usize>>,
    /// Tree variant: bracketed text form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    pub potential_trace: Vec<f64>,
    pub regular_fraction_per_bias: Vec<f64>,
}

// Floating-point slack for the potential-increase assertion.
const POTENTIAL_SLACK: f64 = 1e-9;

/// Greedy junta regularization: grows `T` until, for every configured bias,
/// the restricted function is `(δ,τ)`-noisy-regular on all but an ε-fraction
/// of restriction mass. Each round adds the offending variable of every
/// failing restriction of the first failing bias.
pub fn jones_junta(f: &BooleanFunction, config: &RegularityConfig) -> Result<(u32, JonesReport)> {
    config.validate()?;
    let rho = 1.0 - config.delta;
    let bound = config.round_bound();
    let mut t_set = 0u32;
    let mut trace = vec![stability_potential(f, t_set, rho, &config.biases)?];
    let mut rounds = 0u32;
    loop {
        let fractions: Vec<f64> = config
            .biases
            .iter()
            .map(|&p| regular_fraction(f, t_set, config, p, 0))
            .collect::<Result<_>>()?;
        match fractions.iter().position(|&frac| frac < 1.0 - config.epsilon) {
            None => {
                return Ok((
                    t_set,
                    JonesReport {
                        rounds,
                        depth: t_set.count_ones(),
                        junta: Some((0..32).filter(|i| t_set >> i & 1 == 1).collect()),
                        tree: None,
                        potential_trace: trace,
                        regular_fraction_per_bias: fractions,
                    },
                ));
            }
            Some(k) => {
                if rounds as u64 >= bound {
                    return Err(Error::RoundBound { bound });
                }
                let p = config.biases[k];
                let mut additions = 0u32;
                for (r, _) in assignments(t_set, p) {
                    let e = restricted_expansion(f, &r, p)?;
                    if let (false, Some(local_i)) =
                        check_expansion(&e, config, RegularityMode::Noisy)
                    {
                        // Map the restricted coordinate back to the original
                        // numbering (free coordinates keep their order).
                        let free: Vec<usize> =
                            (0..f.arity() as usize).filter(|i| t_set >> i & 1 == 0).collect();
                        additions |= 1 << free[local_i];
                    }
                }
                debug_assert!(additions & t_set == 0 && additions != 0);
                t_set |= additions;
                rounds += 1;
                let phi = stability_potential(f, t_set, rho, &config.biases)?;
                let gain = phi - trace.last().unwrap();
                if gain + POTENTIAL_SLACK < config.epsilon * config.delta * config.tau {
                    return Err(Error::Precondition(format!(
                        "potential gain {gain} below the guaranteed ε·δ·τ"
                    )));
                }
                trace.push(phi);
            }
        }
    }
}

/// Decision-tree variant: each failing leaf queries its own offending
/// variable, so depth grows by at most one per round and stays within
/// `ℓ/(ε·δ·τ)`.
pub fn jones_decision_tree(
    f: &BooleanFunction,
    config: &RegularityConfig,
) -> Result<(RestrictionTree, JonesReport)> {
    config.validate()?;
    let rho = 1.0 - config.delta;
    let bound = config.round_bound();
    let mut tree = RestrictionTree::trivial();
    let mut trace = vec![stability_potential_tree(f, &tree, rho, &config.biases)?];
    let mut rounds = 0u32;
    loop {
        let fractions: Vec<f64> = config
            .biases
            .iter()
            .map(|&p| tree_regular_fraction(f, &tree, config, p))
            .collect::<Result<_>>()?;
        match fractions.iter().position(|&frac| frac < 1.0 - config.epsilon) {
            None => {
                return Ok((
                    tree.clone(),
                    JonesReport {
                        rounds,
                        depth: tree.depth(),
                        junta: None,
                        tree: Some(tree.to_text()),
                        potential_trace: trace,
                        regular_fraction_per_bias: fractions,
                    },
                ));
            }
            Some(_) => {
                if rounds as u64 >= bound {
                    return Err(Error::RoundBound { bound });
                }
                tree = RestrictionTree { root: split_failing(f, tree.root, config)? };
                rounds += 1;
                let phi = stability_potential_tree(f, &tree, rho, &config.biases)?;
                let gain = phi - trace.last().unwrap();
                if gain + POTENTIAL_SLACK < config.epsilon * config.delta * config.tau {
                    return Err(Error::Precondition(format!(
                        "potential gain {gain} below the guaranteed ε·δ·τ"
                    )));
                }
                trace.push(phi);
            }
        }
    }
}

fn tree_regular_fraction(
    f: &BooleanFunction,
    tree: &RestrictionTree,
    config: &RegularityConfig,
    p: f64,
) -> Result<f64> {
    let mut regular = 0.0;
    for r in tree.leaves() {
        let e = restricted_expansion(f, &r, p)?;
        if check_expansion(&e, config, RegularityMode::Noisy).0 {
            regular += RestrictionTree::leaf_weight(&r, p);
        }
    }
    Ok(regular)
}

/// Splits every leaf that fails the noisy check under *some* configured
/// bias, querying the max-noisy-influence variable for the first such bias.
fn split_failing(
    f: &BooleanFunction,
    node: TreeNode,
    config: &RegularityConfig,
) -> Result<TreeNode> {
    match node {
        TreeNode::Query { var, zero, one } => Ok(TreeNode::Query {
            var,
            zero: Box::new(split_failing(f, *zero, config)?),
            one: Box::new(split_failing(f, *one, config)?),
        }),
        TreeNode::Leaf(r) => {
            for &p in &config.biases {
                let e = restricted_expansion(f, &r, p)?;
                if let (false, Some(local_i)) = check_expansion(&e, config, RegularityMode::Noisy)
                {
                    let free: Vec<usize> =
                        (0..f.arity() as usize).filter(|i| r.fixed >> i & 1 == 0).collect();
                    let var = free[local_i];
                    let zero = Restriction { fixed: r.fixed | 1 << var, values: r.values };
                    let one = Restriction {
                        fixed: r.fixed | 1 << var,
                        values: r.values | 1 << var,
                    };
                    return Ok(TreeNode::Query {
                        var,
                        zero: Box::new(TreeNode::Leaf(zero)),
                        one: Box::new(TreeNode::Leaf(one)),
                    });
                }
            }
            Ok(TreeNode::Leaf(r))
        }
    }
}

/// Re-checks a finished junta against the definition: per-bias regular
/// fraction of restriction mass.
pub fn verify_junta(
    f: &BooleanFunction,
    t_set: u32,
    config: &RegularityConfig,
) -> Result<Vec<f64>> {
    config
        .biases
        .iter()
        .map(|&p| regular_fraction(f, t_set, config, p, 0))
        .collect()
}

/// Same for a finished tree.
pub fn verify_tree(
    f: &BooleanFunction,
    tree: &RestrictionTree,
    config: &RegularityConfig,
) -> Result<Vec<f64>> {
    config
        .biases
        .iter()
        .map(|&p| tree_regular_fraction(f, tree, config, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::random_restriction;

    fn cfg(d: u32, tau: f64, delta: f64, eps: f64, biases: &[f64]) -> RegularityConfig {
        RegularityConfig { d, tau, delta, epsilon: eps, biases: biases.to_vec() }
    }

    /// OR of `s` disjoint ANDs of width `w`.
    fn tribes(w: u32, s: u32) -> BooleanFunction {
        BooleanFunction::from_fn(w * s, |x| {
            (0..s).any(|b| {
                let block = (x >> (b * w)) & ((1 << w) - 1);
                block == (1 << w) - 1
            })
        })
        .unwrap()
    }

    #[test]
    fn regularity_check_examples() {
        let c = cfg(1, 0.5, 0.25, 0.1, &[0.5]);
        let constant = BooleanFunction::constant(4, true).unwrap();
        assert_eq!(
            regularity_check(&constant, &c, 0.5, RegularityMode::LowDegree).unwrap(),
            (true, None)
        );
        let dict = BooleanFunction::dictator(4, 1).unwrap();
        assert_eq!(
            regularity_check(&dict, &c, 0.5, RegularityMode::LowDegree).unwrap(),
            (false, Some(1))
        );
        // Maj9 has all low-degree influences below 0.3 at d = 2.
        let maj9 = BooleanFunction::majority(9).unwrap();
        let c = cfg(2, 0.3, 0.25, 0.1, &[0.5]);
        assert_eq!(
            regularity_check(&maj9, &c, 0.5, RegularityMode::LowDegree).unwrap(),
            (true, None)
        );
    }

    #[test]
    fn potential_examples() {
        let maj3 = BooleanFunction::majority(3).unwrap();
        // T = ∅ at a single bias is plain stability.
        let phi = stability_potential(&maj3, 0, 0.5, &[0.5]).unwrap();
        assert!((phi - 13.0 / 32.0).abs() < 1e-12);
        // f = x0 with T = {0}: restrictions are constants, stability 1.
        let dict = BooleanFunction::dictator(3, 0).unwrap();
        let phi = stability_potential(&dict, 0b001, 0.7, &[0.5]).unwrap();
        assert!((phi - 1.0).abs() < 1e-12);
        // Maj3 with T = {2}: average of the stabilities of the two
        // two-variable restrictions, each 9/16 at ρ = 1/2.
        let phi = stability_potential(&maj3, 0b100, 0.5, &[0.5]).unwrap();
        assert!((phi - 9.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn step_identity_small_cases() {
        let dict = BooleanFunction::dictator(3, 0).unwrap();
        let (lhs, rhs, diff) = jones_step_identity_check(&dict, 0, 0.5, 0.5).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12 && (rhs - 1.0).abs() < 1e-12 && diff < 1e-12);
        let c = BooleanFunction::constant(3, false).unwrap();
        let (lhs, rhs, diff) = jones_step_identity_check(&c, 1, 0.3, 0.25).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12 && (rhs - 1.0).abs() < 1e-12 && diff < 1e-12);
    }

    #[test]
    fn step_identity_random_grid() {
        let mut rng = CounterRng::new(2024, 0);
        for trial in 0..60 {
            let n = 1 + (trial % 8) as u32;
            let f = BooleanFunction::from_fn(n, |_| rng.next_bool(0.5)).unwrap();
            for rho in [0.25, 0.5, 0.75] {
                for p in [0.25, 0.5, 0.75] {
                    for i in 0..n as usize {
                        let (_, _, diff) = jones_step_identity_check(&f, i, rho, p).unwrap();
                        assert!(diff <= 1e-12, "n={n} i={i} rho={rho} p={p} diff={diff}");
                    }
                }
            }
        }
    }

    #[test]
    fn junta_already_regular_is_empty() {
        let maj9 = BooleanFunction::majority(9).unwrap();
        let c = cfg(2, 0.4, 0.25, 0.2, &[0.5]);
        let (t, report) = jones_junta(&maj9, &c).unwrap();
        assert_eq!(t, 0);
        assert_eq!(report.rounds, 0);
        assert!(report.regular_fraction_per_bias.iter().all(|&f| f >= 0.8));
    }

    #[test]
    fn junta_grabs_the_influential_coordinate() {
        // x0 ⊕ Tribes(2,3) on the remaining six variables; coordinate 0 has
        // noisy influence ≈ 1 and must enter T.
        let t23 = tribes(2, 3);
        let f = BooleanFunction::from_fn(7, |x| ((x & 1) == 1) ^ t23.eval(x >> 1)).unwrap();
        let c = cfg(2, 0.2, 0.25, 0.2, &[0.5]);
        let (t, report) = jones_junta(&f, &c).unwrap();
        assert!(t & 1 == 1, "T = {t:#b}");
        assert!(report.rounds as u64 <= c.round_bound());
        // Verify the output guarantee independently.
        for frac in verify_junta(&f, t, &c).unwrap() {
            assert!(frac >= 1.0 - c.epsilon);
        }
        // Potential increases by at least εδτ per round.
        for w in report.potential_trace.windows(2) {
            assert!(w[1] - w[0] >= c.epsilon * c.delta * c.tau - 1e-9);
        }
    }

    #[test]
    fn decision_tree_dictator_depth_one() {
        let dict = BooleanFunction::dictator(4, 2).unwrap();
        let c = cfg(1, 0.5, 0.25, 0.2, &[0.5]);
        let (tree, report) = jones_decision_tree(&dict, &c).unwrap();
        assert_eq!(report.depth, 1);
        assert_eq!(tree.to_text(), "[x2 0:leaf 1:leaf]");
        for frac in verify_tree(&dict, &tree, &c).unwrap() {
            assert!(frac >= 1.0 - c.epsilon);
        }
    }

    #[test]
    fn decision_tree_bounds_and_guarantee() {
        let c = cfg(2, 0.15, 0.25, 0.15, &[0.5, 0.25]);
        for f in [
            BooleanFunction::majority(5).unwrap(),
            tribes(2, 3),
            BooleanFunction::parity(5, 0b10101, false).unwrap(),
        ] {
            let (tree, report) = jones_decision_tree(&f, &c).unwrap();
            assert!(report.depth as u64 <= c.round_bound());
            assert_eq!(report.rounds, report.potential_trace.len() as u32 - 1);
            for w in report.potential_trace.windows(2) {
                assert!(w[1] - w[0] >= c.epsilon * c.delta * c.tau - 1e-9);
            }
            for frac in verify_tree(&f, &tree, &c).unwrap() {
                assert!(frac >= 1.0 - c.epsilon);
            }
        }
    }

    #[test]
    fn junta_round_bound_on_random_functions() {
        let mut rng = CounterRng::new(99, 1);
        let c = cfg(2, 0.25, 0.25, 0.25, &[0.5]);
        for _ in 0..50 {
            let f = BooleanFunction::from_fn(6, |_| rng.next_bool(0.5)).unwrap();
            let (_, report) = jones_junta(&f, &c).unwrap();
            assert!((report.rounds as u64) <= c.round_bound());
        }
    }

    #[test]
    fn conversion_identity_and_implication() {
        let c = cfg(2, 0.1, 0.3, 0.1, &[0.5]);
        let converted = noisy_to_lowdegree(&c).unwrap();
        assert!((converted.delta - 0.5).abs() < 1e-12);
        assert!((converted.tau - 0.025).abs() < 1e-12);
        // d = 1 caps δ at 1/2.
        let c1 = cfg(1, 0.1, 0.3, 0.1, &[0.5]);
        assert!((noisy_to_lowdegree(&c1).unwrap().delta - 0.5).abs() < 1e-12);
        // Implication: passing the converted noisy check implies the
        // low-degree check, on random functions.
        let base = cfg(2, 0.35, 0.3, 0.1, &[0.5]);
        let noisy = noisy_to_lowdegree(&base).unwrap();
        let mut rng = CounterRng::new(5, 5);
        let mut pass_count = 0;
        for _ in 0..100 {
            let f = BooleanFunction::from_fn(7, |_| rng.next_bool(0.5)).unwrap();
            let (noisy_ok, _) = regularity_check(&f, &noisy, 0.5, RegularityMode::Noisy).unwrap();
            if noisy_ok {
                pass_count += 1;
                let (low_ok, _) =
                    regularity_check(&f, &base, 0.5, RegularityMode::LowDegree).unwrap();
                assert!(low_ok);
            }
        }
        assert!(pass_count > 0, "conversion test never exercised the implication");
    }

    #[test]
    fn sampled_regular_fraction_path() {
        // 22 variables with 21 fixed forces the sampled estimate. The
        // function ignores the free coordinate, so every restriction is
        // constant and regular.
        let f = BooleanFunction::parity(22, 0b11, false).unwrap();
        let c = cfg(2, 0.5, 0.25, 0.1, &[0.5]);
        let t_set = (1u32 << 21) - 1;
        let frac = regular_fraction(&f, t_set, &c, 0.5, 7).unwrap();
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn restriction_variance_survives_for_majority() {
        // For Maj_n, a 1/2-random restriction keeps variance ≥ 0.1 in at
        // least 90% of seeded trials.
        for n in [11u32, 15] {
            let maj = BooleanFunction::majority(n).unwrap();
            let mut hits = 0;
            let trials = 1000;
            for seed in 0..trials {
                let r = random_restriction(n, 0.5, 0xA11CE + seed);
                let g = maj.restrict(&r).unwrap();
                let mean = g.mean(View::PmOne, 0.5);
                if 1.0 - mean * mean >= 0.1 {
                    hits += 1;
                }
            }
            assert!(hits * 10 >= trials * 9, "n={n}: {hits}/{trials}");
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let c = cfg(0, 0.5, 0.25, 0.1, &[0.5]);
        assert!(matches!(
            jones_junta(&BooleanFunction::majority(3).unwrap(), &c),
            Err(Error::Precondition(_))
        ));
        let c = cfg(2, 0.5, 0.25, 0.1, &[]);
        assert!(c.validate().is_err());
        let c = cfg(2, 1.5, 0.25, 0.1, &[0.5]);
        assert!(c.validate().is_err());
    }
}
