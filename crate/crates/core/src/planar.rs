//! Planar free energy by enumeration of permutation pairs.
//!
//! A pair `(σ, τ)` of permutations of `n` edges is a bicolored map: cycles of
//! `σ` and `τ` are the white and black vertices, cycles of `στ` the faces,
//! where `στ(x) = τ(σ(x))`. The order-`n` free energy is
//! `F_n = (1/n!) Σ_{(σ,τ) planar} γ(στ, Π_σ ∨ Π_τ) θ^{C_σ} θ̄^{C_τ}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num::{BigInt, ToPrimitive};
use rayon::prelude::*;

use crate::algebra::{factorial, GradedPolynomial, Monomial, Rational};
use crate::error::{Error, Result};
use crate::symfun::{partitions, ClassVector};

/// `W_α = (-1)^n ((2n+Σα_p-3)!/(2n)!) ∏_p (-(2p)!/(p!(p-1)!))^{α_p}`.
pub fn w_coefficient(alpha: &ClassVector) -> Result<Rational> {
    let n = alpha.size() as u64;
    if n == 0 {
        return Err(Error::domain("W coefficient needs a nonempty class"));
    }
    let len = alpha.num_cycles() as u64;
    let mut value = Rational::new(factorial(2 * n + len - 3), factorial(2 * n));
    for (i, &m) in alpha.mult().iter().enumerate() {
        let p = i as u64 + 1;
        let base = factorial(2 * p) / (factorial(p) * factorial(p - 1));
        value *= Rational::from_integer(base.pow(m));
        if m % 2 == 1 {
            value = -value;
        }
    }
    if n % 2 == 1 {
        value = -value;
    }
    Ok(value)
}

fn cycles_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push(x);
            x = perm[x];
        }
        out.push(cycle);
    }
    out
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

/// Two permutations of `{0..n-1}`, stored as image lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermPair {
    sigma: Vec<usize>,
    tau: Vec<usize>,
}

impl PermPair {
    pub fn new(sigma: Vec<usize>, tau: Vec<usize>) -> Result<Self> {
        if sigma.len() != tau.len() || !is_permutation(&sigma) || !is_permutation(&tau) {
            return Err(Error::domain("PermPair needs two permutations of the same size"));
        }
        Ok(PermPair { sigma, tau })
    }

    /// Build from 1-based cycle notation; unlisted points are fixed.
    pub fn from_cycles(n: usize, sigma: &[&[usize]], tau: &[&[usize]]) -> Result<Self> {
        let build = |cycles: &[&[usize]]| -> Result<Vec<usize>> {
            let mut p: Vec<usize> = (0..n).collect();
            for c in cycles {
                for (k, &x) in c.iter().enumerate() {
                    let y = c[(k + 1) % c.len()];
                    if x == 0 || x > n || y == 0 || y > n {
                        return Err(Error::domain(format!("cycle entry out of range 1..{n}")));
                    }
                    p[x - 1] = y - 1;
                }
            }
            Ok(p)
        };
        PermPair::new(build(sigma)?, build(tau)?)
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    /// `στ`, acting as `x -> τ(σ(x))`.
    pub fn product(&self) -> Vec<usize> {
        self.sigma.iter().map(|&x| self.tau[x]).collect()
    }
}

/// Vertex, face and component counts of the map encoded by a [`PermPair`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapStats {
    pub sigma_type: ClassVector,
    pub tau_type: ClassVector,
    pub product_type: ClassVector,
    pub sigma_cycles: usize,
    pub tau_cycles: usize,
    pub product_cycles: usize,
    pub components: usize,
    /// `#cyc σ + #cyc τ + #cyc στ - n`
    pub euler: i64,
    pub planar: bool,
}

pub fn map_stats(pair: &PermPair) -> MapStats {
    let n = pair.n();
    let cs = cycles_of(&pair.sigma);
    let ct = cycles_of(&pair.tau);
    let cp = cycles_of(&pair.product());
    let class = |c: &[Vec<usize>]| ClassVector::from_cycle_lengths(c.iter().map(Vec::len));
    let mut uf = UnionFind::new(n);
    for x in 0..n {
        uf.union(x, pair.sigma[x]);
        uf.union(x, pair.tau[x]);
    }
    let components = uf.count();
    let euler = (cs.len() + ct.len() + cp.len()) as i64 - n as i64;
    MapStats {
        sigma_type: class(&cs),
        tau_type: class(&ct),
        product_type: class(&cp),
        sigma_cycles: cs.len(),
        tau_cycles: ct.len(),
        product_cycles: cp.len(),
        components,
        euler,
        planar: euler == 2 * components as i64,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&x| self.find(x) == x).count()
    }
}

/// Set partition of `{0..n-1}`; blocks sorted internally and by least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
    n: usize,
}

impl SetPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::domain("set partition with an empty block"));
            }
            for &x in b.iter() {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::domain("set partition blocks must be disjoint and cover 0..n"));
                }
            }
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { blocks, n })
    }

    /// Partition whose blocks are the level sets of `labels`.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (x, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(x);
        }
        SetPartition::new(map.into_values().collect()).expect("labels give a valid partition")
    }

    /// Orbits of a permutation.
    pub fn from_permutation(perm: &[usize]) -> Self {
        SetPartition::new(cycles_of(perm)).expect("cycles partition the ground set")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Finest common coarsening `self ∨ other`.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition> {
        if self.n != other.n {
            return Err(Error::domain("join of set partitions over different ground sets"));
        }
        let mut uf = UnionFind::new(self.n);
        for b in self.blocks.iter().chain(&other.blocks) {
            for &x in &b[1..] {
                uf.union(b[0], x);
            }
        }
        let labels: Vec<usize> = (0..self.n).map(|x| uf.find(x)).collect();
        Ok(SetPartition::from_labels(&labels))
    }
}

/// Restricted growth strings of length `r`: every set partition of `r` items once.
fn for_each_set_partition(r: usize, mut f: impl FnMut(&[usize], usize)) {
    if r == 0 {
        f(&[], 0);
        return;
    }
    let mut a = vec![0usize; r];
    let mut maxes = vec![0usize; r];
    loop {
        f(&a, maxes[r - 1] + 1);
        let mut i = r - 1;
        loop {
            if i == 0 {
                return;
            }
            if a[i] <= maxes[i - 1] {
                a[i] += 1;
                maxes[i] = maxes[i - 1].max(a[i]);
                for j in i + 1..r {
                    a[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// `γ(ρ, Π)`: sum over set partitions `Π'` of the cycles of `ρ` with
/// `#(Π ∨ Π') = 1` and `#Π_ρ - #Π' = #Π - 1` of `∏_{blocks} W_{C_ρ|block}`.
///
/// `rho` lists the cycles of `ρ` as blocks over the same ground set as `pi`.
pub fn gamma_coefficient(rho: &SetPartition, pi: &SetPartition) -> Result<Rational> {
    if rho.n != pi.n {
        return Err(Error::domain(format!(
            "gamma: cycle ground set has {} points, partition has {}",
            rho.n, pi.n
        )));
    }
    let mut w_cache: HashMap<ClassVector, Rational> = HashMap::new();
    let r = rho.num_blocks();
    let mut total = Rational::from_integer(BigInt::from(0));
    let mut err = None;
    for_each_set_partition(r, |labels, k| {
        if err.is_some() || r as i64 - k as i64 != pi.num_blocks() as i64 - 1 {
            return;
        }
        let mut uf = UnionFind::new(rho.n);
        for b in &pi.blocks {
            for &x in &b[1..] {
                uf.union(b[0], x);
            }
        }
        let mut block_rep: Vec<Option<usize>> = vec![None; k];
        for (c, &l) in labels.iter().enumerate() {
            let cycle = &rho.blocks[c];
            for &x in cycle {
                uf.union(cycle[0], x);
            }
            match block_rep[l] {
                Some(rep) => uf.union(rep, cycle[0]),
                None => block_rep[l] = Some(cycle[0]),
            }
        }
        if uf.count() != 1 {
            return;
        }
        let mut product = Rational::from_integer(BigInt::from(1));
        for block in 0..k {
            let class = ClassVector::from_cycle_lengths(
                labels.iter().enumerate().filter(|(_, &l)| l == block).map(|(c, _)| rho.blocks[c].len()),
            );
            let w = match w_cache.get(&class) {
                Some(w) => w.clone(),
                None => match w_coefficient(&class) {
                    Ok(w) => w_cache.entry(class).or_insert(w).clone(),
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                },
            };
            product *= w;
        }
        total += product;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Per-component cycle lengths of `ρ`, sorted; the combinatorial type on which `γ` depends.
type GammaKey = Vec<Vec<u32>>;

fn gamma_from_key(key: &GammaKey) -> i128 {
    let mut rho_blocks = Vec::new();
    let mut pi_blocks = Vec::new();
    let mut next = 0;
    for component in key {
        let mut comp = Vec::new();
        for &len in component {
            let cycle: Vec<usize> = (next..next + len as usize).collect();
            next += len as usize;
            comp.extend(&cycle);
            rho_blocks.push(cycle);
        }
        pi_blocks.push(comp);
    }
    let rho = SetPartition::new(rho_blocks).expect("valid cycles");
    let pi = SetPartition::new(pi_blocks).expect("valid components");
    let g = gamma_coefficient(&rho, &pi).expect("matching ground sets");
    assert!(g.is_integer(), "gamma is not an integer for {key:?}");
    g.to_integer().to_i128().expect("gamma fits in i128")
}

/// Called with `(pairs processed, total pairs)` as enumeration advances.
pub type ProgressHook = Arc<dyn Fn(u64, u64) + Send + Sync>;

#[derive(Clone, Default)]
pub struct EnumOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub progress: Option<ProgressHook>,
}

/// Largest order accepted by [`free_energy_enum`].
pub const MAX_ENUM_ORDER: usize = 10;

/// Planar free energies `F_1..F_order` by permutation-pair enumeration.
pub fn free_energy_enum(order: usize) -> Result<Vec<GradedPolynomial>> {
    free_energy_enum_with(order, &EnumOptions::default())
}

pub fn free_energy_enum_with(order: usize, opts: &EnumOptions) -> Result<Vec<GradedPolynomial>> {
    if order == 0 || order > MAX_ENUM_ORDER {
        return Err(Error::domain(format!("enumeration order must be in 1..={MAX_ENUM_ORDER}, got {order}")));
    }
    let run = || (1..=order).map(|n| free_energy_order(n, opts)).collect::<Vec<_>>();
    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

/// `F_n` alone.
pub fn free_energy_order(n: usize, opts: &EnumOptions) -> GradedPolynomial {
    let classes: Vec<ClassVector> = partitions(n as u32).iter().map(ClassVector::from_partition).collect();
    let shards: Vec<(usize, usize)> = (0..classes.len()).flat_map(|c| (0..n).map(move |k| (c, k))).collect();
    let per_shard = factorial(n as u64 - 1).to_u64().expect("small order");
    let total = per_shard * shards.len() as u64;
    let done = AtomicU64::new(0);

    let partial: Vec<(usize, HashMap<Vec<u32>, i128>)> = shards
        .par_iter()
        .map_init(HashMap::new, |memo, &(class_idx, first)| {
            let sums = enumerate_shard(n, &classes[class_idx], first, memo);
            let so_far = done.fetch_add(per_shard, Ordering::Relaxed) + per_shard;
            if let Some(hook) = &opts.progress {
                hook(so_far, total);
            }
            (class_idx, sums)
        })
        .collect();

    let mut merged: HashMap<(usize, Vec<u32>), i128> = HashMap::new();
    for (class_idx, sums) in partial {
        for (tau_type, v) in sums {
            *merged.entry((class_idx, tau_type)).or_insert(0) += v;
        }
    }
    let mut out = GradedPolynomial::new();
    for ((class_idx, tau_type), v) in merged {
        if v == 0 {
            continue;
        }
        let alpha = &classes[class_idx];
        let coeff = Rational::new(BigInt::from(v), alpha.z());
        out.add_term(Monomial::new(alpha.mult().to_vec(), tau_type), &coeff);
    }
    out
}

/// Permutation with the given cycle type, cycles laid out consecutively.
fn class_representative(alpha: &ClassVector) -> Vec<usize> {
    let mut perm = Vec::new();
    for len in alpha.to_partition().rows() {
        let start = perm.len();
        let len = *len as usize;
        perm.extend((start..start + len).map(|x| if x + 1 == start + len { start } else { x + 1 }));
    }
    perm
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Sum of `γ` over all `τ` with `τ(0) = first`, keyed by the cycle type of `τ`.
fn enumerate_shard(
    n: usize,
    alpha: &ClassVector,
    first: usize,
    memo: &mut HashMap<GammaKey, i128>,
) -> HashMap<Vec<u32>, i128> {
    let sigma = class_representative(alpha);
    let sigma_cycles = alpha.num_cycles() as usize;
    let mut sums: HashMap<Vec<u32>, i128> = HashMap::new();
    let mut tau: Vec<usize> = std::iter::once(first).chain((0..n).filter(|&x| x != first)).collect();

    let mut seen = vec![false; n];
    let mut rho = vec![0usize; n];
    let mut comp = vec![0usize; n];
    let mut tau_mult = vec![0u32; n];
    loop {
        for x in 0..n {
            rho[x] = tau[sigma[x]];
        }
        // cycle type of τ
        tau_mult.iter_mut().for_each(|m| *m = 0);
        seen.iter_mut().for_each(|s| *s = false);
        let mut tau_cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = tau[x];
                len += 1;
            }
            tau_mult[len - 1] += 1;
            tau_cycles += 1;
        }
        // components of σ ∨ τ
        let mut uf = UnionFind::new(n);
        for x in 0..n {
            uf.union(x, sigma[x]);
            uf.union(x, tau[x]);
        }
        for (x, c) in comp.iter_mut().enumerate() {
            *c = uf.find(x);
        }
        let components = comp.iter().enumerate().filter(|&(x, &c)| x == c).count();
        // cycles of ρ grouped by component
        seen.iter_mut().for_each(|s| *s = false);
        let mut by_comp: Vec<(usize, u32)> = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = rho[x];
                len += 1;
            }
            by_comp.push((comp[start], len));
        }
        let euler = (sigma_cycles + tau_cycles + by_comp.len()) as i64 - n as i64;
        if euler == 2 * components as i64 {
            by_comp.sort_unstable();
            let mut key: GammaKey = Vec::with_capacity(components);
            let mut last = usize::MAX;
            for &(c, len) in &by_comp {
                if c != last {
                    key.push(Vec::new());
                    last = c;
                }
                key.last_mut().expect("pushed").push(len);
            }
            key.sort_unstable();
            let g = match memo.get(&key) {
                Some(&g) => g,
                None => {
                    let g = gamma_from_key(&key);
                    memo.insert(key, g);
                    g
                }
            };
            if g != 0 {
                let mut t = tau_mult.clone();
                while t.last() == Some(&0) {
                    t.pop();
                }
                *sums.entry(t).or_insert(0) += g;
            }
        }
        if !next_permutation(&mut tau[1..]) {
            break;
        }
    }
    sums
}
