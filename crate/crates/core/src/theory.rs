//! Running-time constants and exact completion-time laws for small networks.
//!
//! All constants use natural logarithms: a protocol with constant `C(p)`
//! completes in `(1+o(1))·C(p)·ln N` rounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Algorithm;

/// Largest `N` accepted by [`exact_naive_law`].
pub const NAIVE_LAW_MAX_N: usize = 20;
/// Largest `N` accepted by [`exact_oracle_law`].
pub const ORACLE_LAW_MAX_N: usize = 64;

/// Probability mass left unaccounted when a law's tail is cut.
const TAIL_MASS: f64 = 1e-15;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("p must lie in (0, 1], got {p}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub p: f64,
    pub c_naive: f64,
    pub c_cyclic: f64,
    pub c_improved: f64,
    pub lower_bound_c: f64,
}

impl TheoryConstants {
    pub fn at(p: f64) -> Result<Self> {
        check_p(p)?;
        let phase1 = 1.0 / p.ln_1p();
        Ok(TheoryConstants {
            p,
            c_naive: phase1 + 1.0 / p,
            // -ln(1-p) is +inf at p = 1, leaving the phase-1 term alone
            c_cyclic: phase1 + 1.0 / -(-p).ln_1p(),
            c_improved: phase1,
            lower_bound_c: phase1,
        })
    }

    pub fn get(&self, algorithm: Algorithm) -> f64 {
        match algorithm {
            Algorithm::Naive => self.c_naive,
            Algorithm::Cyclic => self.c_cyclic,
            Algorithm::ImprovedCyclic => self.c_improved,
            Algorithm::Oracle => self.lower_bound_c,
        }
    }
}

/// `C(p)` for the given algorithm; the oracle gets the lower-bound constant.
pub fn constant(algorithm: Algorithm, p: f64) -> Result<f64> {
    Ok(TheoryConstants::at(p)?.get(algorithm))
}

/// `f(p) = p + ln(1−p)`, negative exactly when the cyclic constant is below
/// the naive one.
pub fn cyclic_beats_naive(p: f64) -> f64 {
    p + (-p).ln_1p()
}

/// `min(1, 1/(a·p·(1+p)^K))`: bound on the probability that any protocol
/// has `a·p·N` informed nodes after `ln N/ln(1+p) − K` rounds.
pub fn lower_bound_tail(a: f64, p: f64, k: f64) -> f64 {
    debug_assert!(a > 0.0 && a <= 1.0 && k >= 0.0);
    (1.0 / (a * p * (1.0 + p).powf(k))).min(1.0)
}

/// A distribution over completion times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactLaw {
    pub support: Vec<u64>,
    pub probabilities: Vec<f64>,
}

impl ExactLaw {
    /// Builds a law from a dense pmf indexed by time, dropping zero entries.
    pub fn from_dense(pmf: &[f64]) -> Self {
        let (support, probabilities) = pmf
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(t, &q)| (t as u64, q))
            .unzip();
        ExactLaw {
            support,
            probabilities,
        }
    }

    /// Empirical law of a sample.
    pub fn empirical(samples: &[u64]) -> Self {
        let max = samples.iter().copied().max().unwrap_or(0) as usize;
        let mut counts = vec![0.0; max + 1];
        for &t in samples {
            counts[t as usize] += 1.0;
        }
        let total = samples.len().max(1) as f64;
        counts.iter_mut().for_each(|c| *c /= total);
        Self::from_dense(&counts)
    }

    pub fn point_mass(t: u64) -> Self {
        ExactLaw {
            support: vec![t],
            probabilities: vec![1.0],
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn probability(&self, t: u64) -> f64 {
        self.support
            .binary_search(&t)
            .map_or(0.0, |i| self.probabilities[i])
    }

    /// `P(T ≤ t)`.
    pub fn cdf(&self, t: u64) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .take_while(|(&s, _)| s <= t)
            .map(|(_, q)| q)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(&t, q)| t as f64 * q)
            .sum()
    }

    fn max_time(&self) -> u64 {
        self.support.last().copied().unwrap_or(0)
    }

    pub fn total_variation(&self, other: &ExactLaw) -> f64 {
        let end = self.max_time().max(other.max_time());
        0.5 * (0..=end)
            .map(|t| (self.probability(t) - other.probability(t)).abs())
            .sum::<f64>()
    }

    /// True if `self` is stochastically no larger than `other`, i.e. its
    /// CDF is at least `other`'s everywhere, up to `tol`.
    pub fn stochastically_le(&self, other: &ExactLaw, tol: f64) -> bool {
        let end = self.max_time().max(other.max_time());
        let (mut a, mut b) = (0.0, 0.0);
        (0..=end).all(|t| {
            a += self.probability(t);
            b += other.probability(t);
            a + tol >= b
        })
    }
}

pub(crate) fn binomial_pmf(m: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; m + 1];
    pmf[0] = 1.0;
    // multiply out (q + p x)^m one factor at a time
    for i in 0..m {
        for j in (0..=i + 1).rev() {
            let stay = if j <= i { pmf[j] * (1.0 - p) } else { 0.0 };
            let hit = if j > 0 { pmf[j - 1] * p } else { 0.0 };
            pmf[j] = stay + hit;
        }
    }
    pmf
}

/// Distribution of the number of distinct nodes hit among `fresh` marked
/// nodes when `senders` messages land uniformly on `nodes` nodes.
pub fn naive_hit_kernel(nodes: usize, fresh: usize, senders: usize) -> Vec<f64> {
    let n = nodes as f64;
    let mut hits = vec![0.0; fresh + 1];
    hits[0] = 1.0;
    for _ in 0..senders {
        let mut next = vec![0.0; fresh + 1];
        for (x, &mass) in hits.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let new = (fresh - x) as f64 / n;
            next[x] += mass * (1.0 - new);
            if x < fresh {
                next[x + 1] += mass * new;
            }
        }
        hits = next;
    }
    hits
}

/// Law of the naive completion time on `nodes` nodes of which exactly
/// `active` (node 0 included) are active.
fn naive_law_given_active(nodes: usize, active: usize) -> Vec<f64> {
    if active == 1 {
        return vec![1.0];
    }
    let kernels: Vec<Vec<f64>> = (0..active)
        .map(|k| naive_hit_kernel(nodes, active - k, k))
        .collect();
    let mut dist = vec![0.0; active + 1];
    dist[1] = 1.0;
    let mut pmf = vec![0.0];
    loop {
        let mut next = vec![0.0; active + 1];
        for k in 1..active {
            let mass = dist[k];
            if mass == 0.0 {
                continue;
            }
            for (j, &q) in kernels[k].iter().enumerate() {
                next[k + j] += mass * q;
            }
        }
        pmf.push(next[active]);
        next[active] = 0.0;
        dist = next;
        if dist.iter().sum::<f64>() < TAIL_MASS {
            return pmf;
        }
    }
}

/// Exact law of the naive protocol's completion time, averaged over active
/// sets with node 0 active and the others active w.p. `p`.
pub fn exact_naive_law(nodes: usize, p: f64) -> Result<ExactLaw> {
    check_p(p)?;
    if nodes == 0 || nodes > NAIVE_LAW_MAX_N {
        return Err(Error::TooLarge {
            what: "N",
            value: nodes,
            limit: NAIVE_LAW_MAX_N,
        });
    }
    let weights = binomial_pmf(nodes - 1, p);
    let mut pmf: Vec<f64> = Vec::new();
    for (others, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let law = naive_law_given_active(nodes, others + 1);
        if pmf.len() < law.len() {
            pmf.resize(law.len(), 0.0);
        }
        for (t, q) in law.iter().enumerate() {
            pmf[t] += w * q;
        }
    }
    Ok(ExactLaw::from_dense(&pmf))
}

/// Exact law of the oracle's completion time.
///
/// The oracle's informed count and the number of targeted nodes evolve
/// without reference to the untargeted nodes, which stay i.i.d. active
/// w.p. `p`. So `P(T ≤ t)` is the expectation of `(1−p)^{untargeted}`
/// under the joint law of (informed, targeted) after `t` rounds.
pub fn exact_oracle_law(nodes: usize, p: f64) -> Result<ExactLaw> {
    check_p(p)?;
    if nodes == 0 || nodes > ORACLE_LAW_MAX_N {
        return Err(Error::TooLarge {
            what: "N",
            value: nodes,
            limit: ORACLE_LAW_MAX_N,
        });
    }
    let pool = nodes - 1;
    let all_inactive: Vec<f64> = (0..=pool).map(|r| (1.0 - p).powi(r as i32)).collect();
    let binomials: Vec<Vec<f64>> = (0..=pool).map(|m| binomial_pmf(m, p)).collect();

    // dist[k][targeted]
    let mut dist = vec![vec![0.0; pool + 1]; nodes + 1];
    dist[1][0] = 1.0;
    let mut cdf = Vec::new();
    loop {
        let mut done = 0.0;
        let mut pending = false;
        for (k, row) in dist.iter().enumerate() {
            for (targeted, &mass) in row.iter().enumerate() {
                if mass > 0.0 {
                    done += mass * all_inactive[pool - targeted];
                    pending |= targeted < pool && k > 0;
                }
            }
        }
        cdf.push(done.min(1.0));
        if !pending {
            break;
        }
        let mut next = vec![vec![0.0; pool + 1]; nodes + 1];
        for k in 1..=nodes {
            for targeted in 0..=pool {
                let mass = dist[k][targeted];
                if mass == 0.0 {
                    continue;
                }
                let batch = k.min(pool - targeted);
                for (j, &q) in binomials[batch].iter().enumerate() {
                    next[k + j][targeted + batch] += mass * q;
                }
            }
        }
        dist = next;
    }
    let pmf: Vec<f64> = cdf
        .iter()
        .enumerate()
        .map(|(t, &c)| if t == 0 { c } else { (c - cdf[t - 1]).max(0.0) })
        .collect();
    Ok(ExactLaw::from_dense(&pmf))
}
