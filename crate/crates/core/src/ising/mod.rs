//! The finite-volume Ising measure on a box with boundary ring and clamps:
//! Hamiltonian, exact oracles, monotone heat-bath dynamics and monotone
//! coupling from the past.

mod cftp;
mod enumerate;
mod sampling;
mod transfer;

pub use cftp::{cftp_coupled, cftp_sample, CftpSample, DEFAULT_MAX_SWEEPS};
pub use enumerate::{stationarity_residual, ExactMeasure, StateView, ENUMERATION_LIMIT};
pub use sampling::{
    run_coupled, sample_plus_phase, RunDiagnostics, SamplingPlan, Strategy,
};
pub use transfer::{TransferOracle, TRANSFER_LIMIT};

use crate::error::{Error, Result};
use crate::lattice::{Site, SiteRole, Spin, SpinConfig, SquareBox};
use crate::seed::{rng_from_seed, uniform, ChainRng};

/// Critical inverse temperature `ln(1 + sqrt 2) / 2` of the square lattice.
pub const BETA_C: f64 = 0.440_686_793_509_771_7;

/// Sign convention for the field term.
///
/// `Literal` places `+h * sum(spins)` inside the Hamiltonian with
/// weight `exp(-H)`, so positive `h` favours minus spins. `Conventional`
/// flips that sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldSign {
    #[default]
    Literal,
    Conventional,
}

impl FieldSign {
    pub fn label(self) -> &'static str {
        match self {
            FieldSign::Literal => "literal",
            FieldSign::Conventional => "conventional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
    pub field_sign: FieldSign,
}

impl ModelParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature must be finite and positive, got {beta}"
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidParameter(format!("field must be finite, got {h}")));
        }
        Ok(ModelParams {
            beta,
            h,
            field_sign: FieldSign::Literal,
        })
    }

    pub fn zero_field(beta: f64) -> Result<Self> {
        Self::new(beta, 0.0)
    }

    pub fn with_field_sign(mut self, s: FieldSign) -> Self {
        self.field_sign = s;
        self
    }

    /// Coefficient of `spin` in the log-weight `-H` coming from the field.
    #[inline]
    pub fn log_weight_field(&self) -> f64 {
        match self.field_sign {
            FieldSign::Literal => -self.h,
            FieldSign::Conventional => self.h,
        }
    }

    /// Edwards–Sokal bond probability `1 - e^{-2 beta}`.
    pub fn bond_probability(&self) -> f64 {
        -(-2.0 * self.beta).exp_m1()
    }

    /// `P(+ | neighbour sum s)` of the single-site heat-bath kernel.
    #[inline]
    pub fn plus_probability(&self, neighbor_sum: i32) -> f64 {
        let a = 2.0 * (self.beta * neighbor_sum as f64 + self.log_weight_field());
        1.0 / (1.0 + (-a).exp())
    }
}

/// Energy `H` of the configuration on its volume.
///
/// The volume is the set of interior sites that are not masked (clamped
/// sites count as ordinary volume sites). Every bond with at least one end
/// in the volume is counted once.
pub fn hamiltonian(c: &SpinConfig, p: &ModelParams) -> f64 {
    let g = c.geometry();
    let in_volume =
        |s: Site| g.contains(s) && c.role(s).map(|r| r != SiteRole::Masked).unwrap_or(false);
    let mut bonds = 0i64;
    let mut field = 0i64;
    for s in g.sites().filter(|&s| in_volume(s)) {
        let v = c.spin(s).value() as i64;
        field += v;
        for t in s.neighbors() {
            let w = c.spin(t).value() as i64;
            if in_volume(t) {
                if s < t {
                    bonds += v * w;
                }
            } else {
                bonds += v * w;
            }
        }
    }
    let field_term = match p.field_sign {
        FieldSign::Literal => p.h * field as f64,
        FieldSign::Conventional => -p.h * field as f64,
    };
    -p.beta * bonds as f64 + field_term
}

/// Precomputed heat-bath acceptance table for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct HeatBath {
    params: ModelParams,
    /// `P(+ | S)` for `S = -4, -2, 0, 2, 4`.
    probs: [f64; 5],
}

impl HeatBath {
    pub fn new(params: &ModelParams) -> Self {
        let mut probs = [0.0; 5];
        for (i, p) in probs.iter_mut().enumerate() {
            *p = params.plus_probability(2 * i as i32 - 4);
        }
        HeatBath {
            params: *params,
            probs,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    #[inline]
    pub fn plus_probability(&self, neighbor_sum: i32) -> f64 {
        self.probs[((neighbor_sum + 4) >> 1) as usize]
    }
}

/// Set `site` to `+` iff `u < P(+ | neighbours)`.
///
/// Feeding the same `u` to two ordered configurations keeps them ordered.
pub fn heat_bath_update(c: &mut SpinConfig, site: Site, u: f64, p: &ModelParams) -> Result<()> {
    match c.role(site)? {
        SiteRole::Free => {}
        SiteRole::Boundary | SiteRole::Corner => {
            return Err(Error::Dimension(format!(
                "({},{}) is not an interior site",
                site.x, site.y
            )))
        }
        _ => return Err(Error::ClampViolation { x: site.x, y: site.y }),
    }
    let s: i32 = site.neighbors().iter().map(|&t| c.spin(t).value() as i32).sum();
    let v = Spin::from_bool(u < p.plus_probability(s));
    c.set(site, v)
}

/// Sweep order: even-parity interior sites then odd-parity ones, each
/// block in index order. Uniform `k` of a sweep belongs to the `k`-th site
/// of this order whether or not that site is free, so configurations with
/// different clamp sets can share one uniform vector.
pub(crate) fn checkerboard_order(g: &SquareBox) -> Vec<Site> {
    let mut even: Vec<Site> = Vec::with_capacity(g.site_count() / 2 + 1);
    let mut odd: Vec<Site> = Vec::with_capacity(g.site_count() / 2 + 1);
    for s in g.sites() {
        if s.parity() == 0 {
            even.push(s);
        } else {
            odd.push(s);
        }
    }
    even.extend(odd);
    even
}

/// Free sites of one configuration paired with their uniform slot.
#[derive(Debug, Clone)]
pub(crate) struct SweepPlan {
    steps: Vec<(u32, u32)>,
    width: usize,
    uniforms: usize,
}

impl SweepPlan {
    pub(crate) fn new(c: &SpinConfig) -> Self {
        let g = c.geometry();
        let roles = c.roles();
        let steps = checkerboard_order(&g)
            .into_iter()
            .enumerate()
            .filter_map(|(k, s)| {
                let p = g.padded(s).expect("inside");
                (roles[p] == SiteRole::Free).then_some((k as u32, p as u32))
            })
            .collect();
        SweepPlan {
            steps,
            width: g.padded_side(),
            uniforms: g.site_count(),
        }
    }

    #[inline]
    pub(crate) fn uniforms_per_sweep(&self) -> usize {
        self.uniforms
    }

    #[inline]
    pub(crate) fn apply(&self, cells: &mut [i8], kernel: &HeatBath, u: &[f64]) {
        let w = self.width;
        for &(k, p) in &self.steps {
            let p = p as usize;
            let s = cells[p - 1] as i32 + cells[p + 1] as i32 + cells[p - w] as i32 + cells[p + w] as i32;
            cells[p] = if u[k as usize] < kernel.probs[((s + 4) >> 1) as usize] {
                1
            } else {
                -1
            };
        }
    }
}

pub(crate) fn fill_uniforms(rng: &mut ChainRng, buf: &mut [f64]) {
    for u in buf.iter_mut() {
        *u = uniform(rng);
    }
}

/// A single heat-bath chain with its private random stream.
///
/// Replaying from `(seed, sweep_count = 0)` reproduces every state.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub config: SpinConfig,
    pub sweep_count: u64,
    pub seed: u64,
    rng: ChainRng,
    plan: SweepPlan,
    buf: Vec<f64>,
}

impl ChainState {
    pub fn new(config: SpinConfig, seed: u64) -> Self {
        let plan = SweepPlan::new(&config);
        let buf = vec![0.0; plan.uniforms_per_sweep()];
        ChainState {
            config,
            sweep_count: 0,
            seed,
            rng: rng_from_seed(seed),
            plan,
            buf,
        }
    }

    pub fn sweep_with(&mut self, kernel: &HeatBath) {
        fill_uniforms(&mut self.rng, &mut self.buf);
        self.plan.apply(self.config.cells_mut(), kernel, &self.buf);
        self.sweep_count += 1;
    }

    pub fn rng(&mut self) -> &mut ChainRng {
        &mut self.rng
    }
}

/// One checkerboard heat-bath sweep.
pub fn sweep(state: &mut ChainState, p: &ModelParams) {
    state.sweep_with(&HeatBath::new(p));
}

/// Several configurations on one box driven by the same uniforms.
///
/// Configurations may differ in clamp sets and values; if they start
/// ordered and their frozen spins are ordered the same way, the order
/// persists forever.
#[derive(Debug, Clone)]
pub struct CoupledChains {
    configs: Vec<SpinConfig>,
    plans: Vec<SweepPlan>,
    rng: ChainRng,
    buf: Vec<f64>,
    sweeps: u64,
}

impl CoupledChains {
    pub fn new(configs: Vec<SpinConfig>, seed: u64) -> Result<Self> {
        let first = configs
            .first()
            .ok_or_else(|| Error::InvalidParameter("no chains to couple".into()))?
            .geometry();
        if configs.iter().any(|c| c.geometry() != first) {
            return Err(Error::Dimension("coupled chains must share one box".into()));
        }
        let plans: Vec<SweepPlan> = configs.iter().map(SweepPlan::new).collect();
        Ok(CoupledChains {
            buf: vec![0.0; first.site_count()],
            configs,
            plans,
            rng: rng_from_seed(seed),
            sweeps: 0,
        })
    }

    pub fn sweep(&mut self, kernel: &HeatBath) {
        fill_uniforms(&mut self.rng, &mut self.buf);
        for (c, plan) in self.configs.iter_mut().zip(&self.plans) {
            plan.apply(c.cells_mut(), kernel, &self.buf);
        }
        self.sweeps += 1;
    }

    pub fn configs(&self) -> &[SpinConfig] {
        &self.configs
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }
}

/// Box `[-n, n]^2` with uniform interior and boundary.
pub fn uniform_config(n: usize, interior: Spin, boundary: Spin) -> Result<SpinConfig> {
    Ok(SpinConfig::uniform(SquareBox::new(n)?, interior, boundary))
}

/// Box with the given boundary and line sites `(x, 0)` clamped.
pub fn line_clamped(n: usize, boundary: Spin, clamps: &[(i32, Spin)]) -> Result<SpinConfig> {
    let mut c = uniform_config(n, boundary, boundary)?;
    for &(x, v) in clamps {
        c.clamp(Site::line(x), v)?;
    }
    Ok(c)
}
