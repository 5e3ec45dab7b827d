//! Random-cluster representation with wired exterior: the Edwards–Sokal
//! bond and colour steps, Swendsen–Wang sweeps, cluster labelling and
//! connectivity to the exterior.
//!
//! The volume is the set of free sites of a template configuration. Every
//! other site (ring, clamped, masked) belongs to the wired exterior and must
//! carry one common spin. Bonds are the nearest-neighbour pairs with at
//! least one free endpoint; bonds outside that set are open.

mod duality;
mod union_find;

pub use duality::{dual_beta, dual_p};
pub use union_find::UnionFind;

use std::sync::Arc;

use rand_xoshiro::rand_core::RngCore;

use crate::error::{Error, Result};
use crate::ising::ModelParams;
use crate::lattice::{Region, Site, Spin, SpinConfig, SquareBox};
use crate::seed::{fair_bit, rng_from_seed, uniform, ChainRng};
use crate::stats::{BatchMeans, EstimateWithCI};

/// A bond; endpoints are nodes `0..free_count` for free sites and
/// `free_count` for the exterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: Site,
    pub b: Site,
    na: u32,
    nb: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondLattice {
    template: SpinConfig,
    exterior_spin: Spin,
    free: Vec<Site>,
    /// Node of each interior site by box index (`u32::MAX` for frozen ones).
    node_of: Vec<u32>,
    bonds: Vec<Bond>,
}

impl BondLattice {
    /// Bond lattice of the free region of `template`. Fails if the frozen
    /// sites do not share one spin.
    pub fn new(template: &SpinConfig) -> Result<Arc<Self>> {
        let g = template.geometry();
        let free = template.free_sites();
        let mut exterior: Option<Spin> = None;
        for s in g.ring_sites().into_iter().chain(g.sites().filter(|&s| template.is_frozen(s))) {
            let v = template.spin(s);
            match exterior {
                None => exterior = Some(v),
                Some(e) if e != v => {
                    return Err(Error::Unsupported(
                        "wired exterior needs every frozen site and the ring to share one spin"
                            .into(),
                    ))
                }
                _ => {}
            }
        }
        let exterior_spin = exterior.unwrap_or(Spin::Plus);
        let mut node_of = vec![u32::MAX; g.site_count()];
        for (i, &s) in free.iter().enumerate() {
            node_of[g.index(s).expect("inside")] = i as u32;
        }
        let ext = free.len() as u32;
        let node = |s: Site| -> u32 {
            g.index(s)
                .map(|i| node_of[i])
                .filter(|&v| v != u32::MAX)
                .unwrap_or(ext)
        };
        let mut bonds = Vec::new();
        for &s in &free {
            let me = node(s);
            let [left, right, down, up] = s.neighbors();
            for t in [left, down] {
                if node(t) == ext {
                    bonds.push(Bond { a: t, b: s, na: ext, nb: me });
                }
            }
            for t in [right, up] {
                bonds.push(Bond { a: s, b: t, na: me, nb: node(t) });
            }
        }
        Ok(Arc::new(BondLattice {
            template: template.clone(),
            exterior_spin,
            free,
            node_of,
            bonds,
        }))
    }

    /// Plain box `[-n, n]^2` with a wired plus exterior.
    pub fn plus_box(n: usize) -> Result<Arc<Self>> {
        BondLattice::new(&SpinConfig::uniform(SquareBox::new(n)?, Spin::Plus, Spin::Plus))
    }

    pub fn geometry(&self) -> SquareBox {
        self.template.geometry()
    }

    pub fn template(&self) -> &SpinConfig {
        &self.template
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn free_sites(&self) -> &[Site] {
        &self.free
    }

    pub fn exterior_spin(&self) -> Spin {
        self.exterior_spin
    }

    fn exterior_node(&self) -> usize {
        self.free.len()
    }

    /// Node of a site: its free index, or the exterior node.
    fn node(&self, s: Site) -> usize {
        self.geometry()
            .index(s)
            .map(|i| self.node_of[i])
            .filter(|&v| v != u32::MAX)
            .map(|v| v as usize)
            .unwrap_or(self.exterior_node())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondConfig {
    lattice: Arc<BondLattice>,
    open: Vec<bool>,
}

impl BondConfig {
    pub fn all_closed(lattice: Arc<BondLattice>) -> Self {
        let m = lattice.bonds.len();
        BondConfig {
            lattice,
            open: vec![false; m],
        }
    }

    pub fn all_open(lattice: Arc<BondLattice>) -> Self {
        let m = lattice.bonds.len();
        BondConfig {
            lattice,
            open: vec![true; m],
        }
    }

    pub fn lattice(&self) -> &Arc<BondLattice> {
        &self.lattice
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.open[i]
    }

    pub fn set(&mut self, i: usize, open: bool) {
        self.open[i] = open;
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    pub fn states(&self) -> &[bool] {
        &self.open
    }

    /// Index of the bond joining `a` and `b`, if it is in the lattice.
    pub fn bond_index(&self, a: Site, b: Site) -> Option<usize> {
        self.lattice
            .bonds
            .iter()
            .position(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
    }
}

/// Connected components of the open bonds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    /// Per free site: the box index of the smallest site of its cluster.
    labels: Vec<usize>,
    /// Per free site: whether its cluster reaches the exterior.
    wired: Vec<bool>,
    clusters: usize,
    free: Vec<Site>,
}

impl ClusterLabeling {
    /// Number of clusters made of free sites (the exterior cluster counts
    /// once if some free site reaches it).
    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    /// Clusters not connected to the exterior.
    pub fn finite_cluster_count(&self) -> usize {
        let mut seen: Vec<usize> = self
            .labels
            .iter()
            .zip(&self.wired)
            .filter(|(_, &w)| !w)
            .map(|(&l, _)| l)
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    fn slot(&self, s: Site) -> Option<usize> {
        self.free.binary_search(&s).ok()
    }

    /// Canonical label (smallest box index in the cluster) of a free site.
    pub fn label(&self, s: Site) -> Option<usize> {
        self.slot(s).map(|i| self.labels[i])
    }

    /// Whether a site lies in the wired cluster; frozen sites always do.
    pub fn touches_exterior(&self, s: Site) -> bool {
        self.slot(s).map(|i| self.wired[i]).unwrap_or(true)
    }
}

fn components(b: &BondConfig) -> (UnionFind, usize) {
    let lat = &b.lattice;
    let mut uf = UnionFind::new(lat.free.len() + 1);
    for (e, &open) in lat.bonds.iter().zip(&b.open) {
        if open {
            uf.union(e.na as usize, e.nb as usize);
        }
    }
    let ext = lat.exterior_node();
    (uf, ext)
}

pub fn label_clusters(b: &BondConfig) -> ClusterLabeling {
    let lat = &b.lattice;
    let g = lat.geometry();
    let (mut uf, ext) = components(b);
    let ext_root = uf.find(ext);
    // Roots in first-seen order map to the first (smallest) site index.
    let mut root_label = vec![usize::MAX; lat.free.len() + 1];
    let mut labels = Vec::with_capacity(lat.free.len());
    let mut wired = Vec::with_capacity(lat.free.len());
    let mut clusters = 0;
    for (i, &s) in lat.free.iter().enumerate() {
        let r = uf.find(i);
        if root_label[r] == usize::MAX {
            root_label[r] = g.index(s).expect("inside");
            clusters += 1;
        }
        labels.push(root_label[r]);
        wired.push(r == ext_root);
    }
    ClusterLabeling {
        labels,
        wired,
        clusters,
        free: lat.free.clone(),
    }
}

/// Open each bond between equal spins independently with probability
/// `p_bond`; bonds between unequal spins stay closed. One uniform is drawn
/// per bond, in lattice order.
pub fn es_bond_step(
    lattice: &Arc<BondLattice>,
    spins: &SpinConfig,
    p_bond: f64,
    rng: &mut impl RngCore,
) -> Result<BondConfig> {
    if !(0.0..=1.0).contains(&p_bond) {
        return Err(Error::InvalidParameter(format!(
            "bond probability {p_bond} outside [0, 1]"
        )));
    }
    if spins.geometry() != lattice.geometry() {
        return Err(Error::Dimension("spins and bonds live on different boxes".into()));
    }
    let mut out = BondConfig::all_closed(lattice.clone());
    for (i, e) in lattice.bonds.iter().enumerate() {
        let u = uniform(rng);
        out.open[i] = spins.spin(e.a) == spins.spin(e.b) && u < p_bond;
    }
    Ok(out)
}

/// Colour clusters: the exterior cluster takes the exterior spin, every
/// other cluster an independent fair sign (drawn in label order).
pub fn es_color_step(b: &BondConfig, rng: &mut impl RngCore) -> SpinConfig {
    let lat = &b.lattice;
    let (mut uf, ext) = components(b);
    let ext_root = uf.find(ext);
    let mut colour: Vec<Option<Spin>> = vec![None; lat.free.len() + 1];
    colour[ext_root] = Some(lat.exterior_spin);
    let mut out = lat.template.clone();
    for (i, &s) in lat.free.iter().enumerate() {
        let r = uf.find(i);
        let v = *colour[r].get_or_insert_with(|| Spin::from_bool(fair_bit(rng)));
        out.set(s, v).expect("free site");
    }
    out
}

/// True if some site of `sites` is joined to the wired exterior.
pub fn connected_sites_to_exterior(b: &BondConfig, sites: &[Site]) -> bool {
    let lat = &b.lattice;
    let (mut uf, ext) = components(b);
    sites.iter().any(|&s| {
        let n = lat.node(s);
        uf.same(n, ext)
    })
}

/// True if some in-box site of the region is joined to the wired exterior.
pub fn connected_to_exterior(b: &BondConfig, r: &Region) -> Result<bool> {
    let sites = crate::lattice::region_sites(r, &b.lattice.geometry())?;
    Ok(connected_sites_to_exterior(b, &sites))
}

/// Swendsen–Wang chain on a plain box (no clamps or masks) at zero field.
#[derive(Debug, Clone)]
pub struct SwState {
    pub config: SpinConfig,
    pub sweep_count: u64,
    lattice: Arc<BondLattice>,
    rng: ChainRng,
}

impl SwState {
    pub fn new(config: SpinConfig, seed: u64) -> Result<Self> {
        let g = config.geometry();
        if g.sites().any(|s| config.is_frozen(s)) {
            return Err(Error::Unsupported(
                "Swendsen-Wang sweeps do not support clamped or masked sites".into(),
            ));
        }
        let lattice = BondLattice::new(&config)?;
        Ok(SwState {
            config,
            sweep_count: 0,
            lattice,
            rng: rng_from_seed(seed),
        })
    }

    pub fn lattice(&self) -> &Arc<BondLattice> {
        &self.lattice
    }
}

/// One bond step followed by one colour step.
pub fn swendsen_wang_sweep(state: &mut SwState, p: &ModelParams) -> Result<BondConfig> {
    if p.h != 0.0 {
        return Err(Error::Unsupported(
            "Swendsen-Wang sweeps are implemented for zero field only".into(),
        ));
    }
    let bonds = es_bond_step(&state.lattice, &state.config, p.bond_probability(), &mut state.rng)?;
    state.config = es_color_step(&bonds, &mut state.rng);
    state.sweep_count += 1;
    Ok(bonds)
}

/// Largest `free sites + bonds` handled by [`es_joint_support`].
pub const JOINT_LIMIT: usize = 26;

/// Key of a joint spin/bond state: bit `i` for free site `i` plus, then bit
/// `free + j` for bond `j` open.
pub fn es_joint_key(spins: &SpinConfig, bonds: &BondConfig) -> u64 {
    let lat = &bonds.lattice;
    let mut key = 0u64;
    for (i, &s) in lat.free.iter().enumerate() {
        key |= u64::from(spins.spin(s) == Spin::Plus) << i;
    }
    let f = lat.free.len();
    for (j, &o) in bonds.open.iter().enumerate() {
        key |= u64::from(o) << (f + j);
    }
    key
}

/// Exact joint Edwards–Sokal law, as `(key, probability)` pairs sorted by
/// key over its support. The weight of a state is `p` per open bond and
/// `1 - p` per closed bond, open bonds joining equal spins.
pub fn es_joint_support(lattice: &Arc<BondLattice>, p_bond: f64) -> Result<Vec<(u64, f64)>> {
    let f = lattice.free.len();
    let m = lattice.bonds.len();
    if f + m > JOINT_LIMIT {
        return Err(Error::Capacity {
            what: "joint spin-bond enumeration",
            count: f + m,
            limit: JOINT_LIMIT,
        });
    }
    let ext = lattice.exterior_spin;
    let mut out = Vec::new();
    for st in 0u64..1 << f {
        let spin_of = |node: u32| {
            if node as usize == f {
                ext
            } else {
                Spin::from_bool(st >> node & 1 == 1)
            }
        };
        let agree: Vec<usize> = (0..m)
            .filter(|&j| {
                let e = &lattice.bonds[j];
                spin_of(e.na) == spin_of(e.nb)
            })
            .collect();
        for sub in 0u64..1 << agree.len() {
            let open = sub.count_ones() as i32;
            let mut key = st;
            for (i, &j) in agree.iter().enumerate() {
                key |= (sub >> i & 1) << (f + j);
            }
            out.push((key, p_bond.powi(open) * (1.0 - p_bond).powi(m as i32 - open)));
        }
    }
    let z: f64 = out.iter().map(|x| x.1).sum();
    out.iter_mut().for_each(|x| x.1 /= z);
    out.sort_unstable_by_key(|x| x.0);
    Ok(out)
}

/// `P(no site of [-m, -1] x {0} is joined to the wired exterior)` for each
/// `m` in `ms`, from a Swendsen–Wang chain on the plain plus box `box_n`.
///
/// Recorded bond configurations are `thin` sweeps apart after `burn_in`;
/// errors come from `batches` batch means.
#[allow(clippy::too_many_arguments)]
pub fn estimate_disconnection(
    params: &ModelParams,
    ms: &[usize],
    box_n: usize,
    samples: usize,
    burn_in: u64,
    thin: u64,
    batches: usize,
    seed: u64,
) -> Result<Vec<EstimateWithCI>> {
    if let Some(&m) = ms.iter().find(|&&m| m == 0 || m > box_n) {
        return Err(Error::Dimension(format!(
            "segment length {m} must lie in [1, {box_n}]"
        )));
    }
    let mut st = SwState::new(
        crate::ising::uniform_config(box_n, Spin::Plus, Spin::Plus)?,
        seed,
    )?;
    for _ in 0..burn_in {
        swendsen_wang_sweep(&mut st, params)?;
    }
    let max_m = ms.iter().copied().max().unwrap_or(0);
    let nodes: Vec<usize> = (1..=max_m as i32)
        .map(|x| st.lattice.node(Site::line(-x)))
        .collect();
    let mut bm = BatchMeans::for_samples(ms.len(), samples, batches);
    let mut buf = vec![0.0; ms.len()];
    for _ in 0..samples {
        let mut bonds = swendsen_wang_sweep(&mut st, params)?;
        for _ in 1..thin.max(1) {
            bonds = swendsen_wang_sweep(&mut st, params)?;
        }
        let (mut uf, ext) = components(&bonds);
        // First distance from the origin at which the line touches the
        // exterior cluster.
        let first = nodes
            .iter()
            .position(|&v| uf.same(v, ext))
            .map_or(usize::MAX, |i| i + 1);
        for (v, &m) in buf.iter_mut().zip(ms) {
            *v = f64::from(u8::from(first > m));
        }
        bm.push(&buf);
    }
    Ok((0..ms.len()).map(|i| bm.estimate(i, seed)).collect())
}
