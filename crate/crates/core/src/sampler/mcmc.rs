use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{stream_rng, ChainDiagnostics, EnsembleConfig, Provenance, Sample, SampleBatch, ACCEPTANCE_BAND};
use crate::error::{Error, Result};
use crate::potential::{choose_truncation, Grid, PotentialSpec};

const RATIO_CHUNK: usize = 8;
const STEP_BOUNDS: (f64, f64) = (1e-8, 1e3);
const INIT_SPACING: f64 = 0.01;

/// `Σ_{j≠i} log|proposal - λ_j| - log|λ_i - λ_j|`, accumulated as logs of
/// products of a few ratios. Falls back to a plain sum of logs when a
/// partial product leaves the normal range.
pub fn proposal_log_ratio(state: &[f64], i: usize, proposal: f64) -> f64 {
    let current = state[i];
    let mut total = 0.0;
    let mut prod = 1.0;
    let mut k = 0;
    for (j, &l) in state.iter().enumerate() {
        if j == i {
            continue;
        }
        prod *= (proposal - l).abs() / (current - l).abs();
        k += 1;
        if k == RATIO_CHUNK {
            if !prod.is_normal() {
                return direct_log_ratio(state, i, proposal);
            }
            total += prod.ln();
            prod = 1.0;
            k = 0;
        }
    }
    if !prod.is_normal() {
        return direct_log_ratio(state, i, proposal);
    }
    total + prod.ln()
}

fn direct_log_ratio(state: &[f64], i: usize, proposal: f64) -> f64 {
    let current = state[i];
    let mut total = 0.0;
    for (j, &l) in state.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = (proposal - l).abs();
        if d == 0.0 {
            return f64::NEG_INFINITY;
        }
        total += d.ln() - (current - l).abs().ln();
    }
    total
}

/// Inverse-CDF sampler for the reference density `exp(-V) / Z`.
struct ReferenceQuantiles {
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ReferenceQuantiles {
    fn new(v: &PotentialSpec) -> Result<Self> {
        let (lo, hi) = choose_truncation(v, 0.0, 1e-12)?;
        let grid = Grid::with_spacing(lo, hi, INIT_SPACING)?;
        let nodes = grid.nodes();
        let weights: Vec<f64> = nodes.iter().map(|x| (-v.value(*x)).exp()).collect();
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..nodes.len() {
            acc += 0.5 * (weights[i - 1] + weights[i]) * (nodes[i] - nodes[i - 1]);
            cumulative.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Normalization("exp(-V) has no usable mass".into()));
        }
        Ok(Self { nodes, cumulative })
    }

    fn quantile(&self, u: f64) -> f64 {
        let target = u * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|c| *c < target).clamp(1, self.nodes.len() - 1);
        let (c0, c1) = (self.cumulative[k - 1], self.cumulative[k]);
        let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        self.nodes[k - 1] + t * (self.nodes[k] - self.nodes[k - 1])
    }
}

struct ChainOutput {
    samples: Vec<Sample>,
    accepted: u64,
    proposed: u64,
    step: f64,
    sweeps: u64,
}

struct Chain<'a> {
    config: &'a EnsembleConfig,
    state: Vec<f64>,
    confinement: Vec<f64>,
    step: f64,
    rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    fn new(config: &'a EnsembleConfig, quantiles: &ReferenceQuantiles, index: u64) -> Self {
        let mut rng = stream_rng(config.seed, index);
        let mut state: Vec<f64> = (0..config.n_particles)
            .map(|_| quantiles.quantile(rng.random::<f64>()))
            .collect();
        state.sort_by(f64::total_cmp);
        let confinement = state.iter().map(|x| config.potential.value(*x)).collect();
        Self {
            config,
            state,
            confinement,
            step: config.mcmc.step_size,
            rng,
        }
    }

    /// One systematic sweep; returns the number of accepted moves.
    fn sweep(&mut self) -> u64 {
        let beta = self.config.beta;
        let mut accepted = 0;
        for i in 0..self.state.len() {
            let z: f64 = self.rng.sample(StandardNormal);
            let proposal = self.state[i] + self.step * z;
            let v_new = self.config.potential.value(proposal);
            let mut delta = self.confinement[i] - v_new;
            if beta > 0.0 {
                delta += beta * proposal_log_ratio(&self.state, i, proposal);
            }
            let u: f64 = self.rng.random();
            if u.ln() < delta {
                self.state[i] = proposal;
                self.confinement[i] = v_new;
                accepted += 1;
            }
        }
        accepted
    }

    fn run(mut self, count: usize) -> Result<ChainOutput> {
        let settings = &self.config.mcmc;
        let n = self.state.len() as f64;
        for t in 0..settings.sweeps_burnin {
            let rate = self.sweep() as f64 / n;
            if settings.adapt {
                let gain = 1.0 / (t as f64 + 1.0).powf(0.6);
                self.step = (self.step * (gain * (rate - settings.target_acceptance)).exp())
                    .clamp(STEP_BOUNDS.0, STEP_BOUNDS.1);
            }
        }
        let mut samples = Vec::with_capacity(count);
        let mut accepted = 0;
        for _ in 0..count {
            for _ in 0..settings.sweeps_between {
                accepted += self.sweep();
            }
            samples.push(Sample::new(self.state.clone(), Provenance::Mcmc)?);
        }
        let post = (count * settings.sweeps_between) as u64;
        Ok(ChainOutput {
            samples,
            accepted,
            proposed: post * self.state.len() as u64,
            step: self.step,
            sweeps: settings.sweeps_burnin as u64 + post,
        })
    }
}

/// Random-walk Metropolis draws from the ensemble. Chains start from
/// independent draws of the reference density and adapt their step size
/// during burn-in only.
pub fn mcmc_sample(config: &EnsembleConfig, count: usize) -> Result<SampleBatch> {
    config.validate()?;
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let quantiles = ReferenceQuantiles::new(&config.potential)?;
    let chains = config.mcmc.chains.min(count);
    let outputs: Vec<ChainOutput> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let share = count / chains + usize::from(c < count % chains);
            Chain::new(config, &quantiles, c as u64).run(share)
        })
        .collect::<Result<_>>()?;

    let accepted: u64 = outputs.iter().map(|o| o.accepted).sum();
    let proposed: u64 = outputs.iter().map(|o| o.proposed).sum();
    let acceptance_rate = accepted as f64 / proposed as f64;
    let final_step_size = outputs.iter().map(|o| o.step).sum::<f64>() / chains as f64;
    let sweeps_total = outputs.iter().map(|o| o.sweeps).sum();
    let warning = (!(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(&acceptance_rate)).then(|| {
        format!(
            "acceptance rate {acceptance_rate:.3} outside [{}, {}]",
            ACCEPTANCE_BAND.0, ACCEPTANCE_BAND.1
        )
    });
    let samples = outputs.into_iter().flat_map(|o| o.samples).collect();
    SampleBatch::new(
        config.clone(),
        samples,
        ChainDiagnostics {
            acceptance_rate,
            final_step_size,
            sweeps_total,
            warning,
        },
    )
}
