//! Brute-force enumeration of the finite-volume measure over free sites.
//!
//! State `s` encodes free site `i` (in index order) as bit `i`, set for `+`.

use super::{checkerboard_order, ModelParams};
use crate::error::{Error, Result};
use crate::lattice::{Site, Spin, SpinConfig};

/// Largest number of free sites the table is built for (about 4M states).
pub const ENUMERATION_LIMIT: usize = 22;

#[derive(Debug, Clone)]
pub struct ExactMeasure {
    template: SpinConfig,
    params: ModelParams,
    free: Vec<Site>,
    probs: Vec<f64>,
}

/// Read access to one enumerated state.
pub struct StateView<'a> {
    measure: &'a ExactMeasure,
    state: usize,
}

impl StateView<'_> {
    pub fn spin(&self, s: Site) -> Spin {
        self.measure.spin_in(self.state, s)
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl ExactMeasure {
    /// Enumerate the measure of `template` (boundary, masks and clamps are
    /// taken from it; its free-site spins are ignored).
    pub fn new(template: &SpinConfig, params: &ModelParams) -> Result<Self> {
        let free = template.free_sites();
        let k = free.len();
        if k > ENUMERATION_LIMIT {
            return Err(Error::Capacity {
                what: "exact enumeration",
                count: k,
                limit: ENUMERATION_LIMIT,
            });
        }
        let beta = params.beta;
        let fc = params.log_weight_field();
        // Linear coefficient per free site and couplings between free sites.
        let mut lin = vec![fc; k];
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (i, &s) in free.iter().enumerate() {
            for t in s.neighbors() {
                match free.binary_search(&t) {
                    Ok(j) => {
                        if i < j {
                            pairs.push((i, j));
                        }
                    }
                    Err(_) => lin[i] += beta * template.spin(t).value() as f64,
                }
            }
        }
        let n_states = 1usize << k;
        let mut logw = vec![0.0f64; n_states];
        let mut maxw = f64::NEG_INFINITY;
        for (state, lw) in logw.iter_mut().enumerate() {
            let sp = |i: usize| if state >> i & 1 == 1 { 1.0 } else { -1.0 };
            let mut w = 0.0;
            for (i, l) in lin.iter().enumerate() {
                w += l * sp(i);
            }
            let mut b = 0i32;
            for &(i, j) in &pairs {
                b += if (state >> i ^ state >> j) & 1 == 0 { 1 } else { -1 };
            }
            w += beta * b as f64;
            *lw = w;
            maxw = maxw.max(w);
        }
        let mut z = 0.0;
        for lw in logw.iter_mut() {
            *lw = (*lw - maxw).exp();
            z += *lw;
        }
        logw.iter_mut().for_each(|w| *w /= z);
        let mut template = template.clone();
        template.fill_free(Spin::Plus);
        Ok(ExactMeasure {
            template,
            params: *params,
            free,
            probs: logw,
        })
    }

    pub fn free_sites(&self) -> &[Site] {
        &self.free
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn template(&self) -> &SpinConfig {
        &self.template
    }

    fn spin_in(&self, state: usize, s: Site) -> Spin {
        match self.free.binary_search(&s) {
            Ok(i) => Spin::from_bool(state >> i & 1 == 1),
            Err(_) => self.template.spin(s),
        }
    }

    /// State index of a configuration sharing the template's free sites.
    pub fn state_of(&self, c: &SpinConfig) -> usize {
        self.free
            .iter()
            .enumerate()
            .filter(|(_, &s)| c.spin(s) == Spin::Plus)
            .fold(0usize, |acc, (i, _)| acc | 1 << i)
    }

    pub fn config_of(&self, state: usize) -> SpinConfig {
        let mut c = self.template.clone();
        for (i, &s) in self.free.iter().enumerate() {
            c.set(s, Spin::from_bool(state >> i & 1 == 1)).expect("free site");
        }
        c
    }

    pub fn probability(&self, event: impl Fn(&StateView) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|&(state, _)| event(&StateView { measure: self, state }))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn expectation(&self, f: impl Fn(&StateView) -> f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(state, p)| p * f(&StateView { measure: self, state }))
            .sum()
    }

    /// Probability that every listed site carries the listed spin.
    pub fn cylinder(&self, assignment: &[(Site, Spin)]) -> f64 {
        let mut care = 0usize;
        let mut want = 0usize;
        for &(s, v) in assignment {
            match self.free.binary_search(&s) {
                Ok(i) => {
                    let bit = 1usize << i;
                    if care & bit != 0 && (want & bit != 0) != (v == Spin::Plus) {
                        return 0.0;
                    }
                    care |= bit;
                    if v == Spin::Plus {
                        want |= bit;
                    }
                }
                Err(_) => {
                    if self.template.get(s).ok() != Some(v) {
                        return 0.0;
                    }
                }
            }
        }
        self.probs
            .iter()
            .enumerate()
            .filter(|&(state, _)| state & care == want)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn plus_probability(&self, s: Site) -> f64 {
        self.cylinder(&[(s, Spin::Plus)])
    }
}

/// Largest absolute change of the enumerated distribution under one
/// checkerboard heat-bath sweep (zero for an invariant measure).
pub fn stationarity_residual(m: &ExactMeasure) -> f64 {
    let beta = m.params.beta;
    let fc = m.params.log_weight_field();
    let free = &m.free;
    let mut pi = m.probs.clone();
    let mut next = vec![0.0; pi.len()];
    let order = checkerboard_order(&m.template.geometry());
    for s in order {
        let Ok(i) = free.binary_search(&s) else { continue };
        let bit = 1usize << i;
        // Neighbours: free ones read from the state, others fixed.
        let mut fixed = 0i32;
        let mut nb_bits: Vec<usize> = Vec::with_capacity(4);
        for t in s.neighbors() {
            match free.binary_search(&t) {
                Ok(j) => nb_bits.push(1 << j),
                Err(_) => fixed += m.template.spin(t).value() as i32,
            }
        }
        for (state, out) in next.iter_mut().enumerate() {
            let mut sum = fixed;
            for &b in &nb_bits {
                sum += if state & b != 0 { 1 } else { -1 };
            }
            let p_plus = 1.0 / (1.0 + (-2.0 * (beta * sum as f64 + fc)).exp());
            let p = if state & bit != 0 { p_plus } else { 1.0 - p_plus };
            *out = (pi[state] + pi[state ^ bit]) * p;
        }
        std::mem::swap(&mut pi, &mut next);
    }
    pi.iter()
        .zip(&m.probs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{hamiltonian, uniform_config};

    fn single_site(boundary: Spin) -> SpinConfig {
        let mut c = uniform_config(1, boundary, boundary).unwrap();
        for s in c.geometry().sites().collect::<Vec<_>>() {
            if s != Site::ORIGIN {
                c.mask(s, boundary).unwrap();
            }
        }
        c
    }

    #[test]
    fn single_site_plus_boundary() {
        let p = ModelParams::zero_field(0.5).unwrap();
        let m = ExactMeasure::new(&single_site(Spin::Plus), &p).unwrap();
        let want = 1.0 / (1.0 + (-8.0 * 0.5f64).exp());
        assert!((m.plus_probability(Site::ORIGIN) - want).abs() < 1e-14);
        assert!((want - 0.982_014).abs() < 1e-6);
    }

    #[test]
    fn sums_to_one_and_matches_boltzmann() {
        let p = ModelParams::new(0.37, 0.11).unwrap();
        let mut c = uniform_config(1, Spin::Plus, Spin::Minus).unwrap();
        c.clamp(Site::new(1, 1), Spin::Minus).unwrap();
        let m = ExactMeasure::new(&c, &p).unwrap();
        let total: f64 = m.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Ratios agree with exp(-H) computed independently.
        let s0 = 0b1010_1010;
        let s1 = 0b0110_0011;
        let h0 = hamiltonian(&m.config_of(s0), &p);
        let h1 = hamiltonian(&m.config_of(s1), &p);
        let r = m.probabilities()[s0] / m.probabilities()[s1];
        assert!((r - (h1 - h0).exp()).abs() < 1e-10 * r);
        assert_eq!(m.state_of(&m.config_of(s1)), s1);
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let p = ModelParams::zero_field(1e-9).unwrap();
        let c = uniform_config(1, Spin::Plus, Spin::Plus).unwrap();
        let m = ExactMeasure::new(&c, &p).unwrap();
        for &q in m.probabilities() {
            assert!((q - 1.0 / 512.0).abs() < 1e-6);
        }
    }

    #[test]
    fn capacity_limit() {
        let p = ModelParams::zero_field(0.3).unwrap();
        let c = uniform_config(2, Spin::Plus, Spin::Plus).unwrap();
        let err = ExactMeasure::new(&c, &p).unwrap_err();
        assert_eq!(
            err,
            Error::Capacity {
                what: "exact enumeration",
                count: 25,
                limit: 22
            }
        );
        assert!(err.to_string().contains("22"));
    }

    #[test]
    fn flip_covariance_at_zero_field() {
        let p = ModelParams::zero_field(0.52).unwrap();
        let mut c = uniform_config(1, Spin::Plus, Spin::Plus).unwrap();
        c.set(Site::new(2, 0), Spin::Minus).unwrap();
        c.clamp(Site::new(-1, -1), Spin::Minus).unwrap();
        let a = ExactMeasure::new(&c, &p).unwrap();
        let b = ExactMeasure::new(&c.flipped(), &p).unwrap();
        let mask = (1usize << a.free_sites().len()) - 1;
        for (s, &q) in a.probabilities().iter().enumerate() {
            assert!((q - b.probabilities()[!s & mask]).abs() < 1e-15);
        }
    }

    #[test]
    fn heat_bath_fixes_enumerated_measure() {
        for beta in [0.3, 0.44, 0.7] {
            let p = ModelParams::zero_field(beta).unwrap();
            let c = uniform_config(1, Spin::Plus, Spin::Plus).unwrap();
            let m = ExactMeasure::new(&c, &p).unwrap();
            assert!(stationarity_residual(&m) < 1e-10);
        }
        // A wrong measure is not fixed.
        let p = ModelParams::zero_field(0.5).unwrap();
        let c = uniform_config(1, Spin::Plus, Spin::Plus).unwrap();
        let mut m = ExactMeasure::new(&c, &p).unwrap();
        m.probs.iter_mut().for_each(|q| *q = 1.0 / 512.0);
        assert!(stationarity_residual(&m) > 1e-4);
    }

    #[test]
    fn cylinder_consistency() {
        let p = ModelParams::zero_field(0.6).unwrap();
        let c = uniform_config(1, Spin::Minus, Spin::Plus).unwrap();
        let m = ExactMeasure::new(&c, &p).unwrap();
        let a = m.cylinder(&[(Site::ORIGIN, Spin::Plus)]);
        let b = m.cylinder(&[(Site::ORIGIN, Spin::Minus)]);
        assert!((a + b - 1.0).abs() < 1e-12);
        assert_eq!(m.cylinder(&[(Site::ORIGIN, Spin::Plus), (Site::ORIGIN, Spin::Minus)]), 0.0);
        // boundary site
        assert_eq!(m.cylinder(&[(Site::new(2, 0), Spin::Plus)]), 1.0);
        let e = m.probability(|v| v.spin(Site::ORIGIN) == Spin::Plus);
        assert!((e - a).abs() < 1e-14);
    }
}
