//! Partitions, symmetric-group characters, `GL(N)` dimensions in formal `N`,
//! and the moment to free-cumulant transform.
//!
//! Partitions are stored with weakly decreasing rows. Formulas written for
//! increasing rows (`0 ≤ λ_1 ≤ … ≤ λ_N`) go through
//! [`Partition::increasing_rows`].

use std::collections::HashMap;
use std::fmt;

use num::{BigInt, One};

use crate::algebra::{factorial, int, RatN, Rational, Ring, UPoly};
use crate::error::{Error, Result};

/// Integer partition with weakly decreasing positive rows.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    rows: Vec<u32>,
}

impl Partition {
    /// Build from rows in any order; zero rows are dropped.
    pub fn new(mut rows: Vec<u32>) -> Self {
        rows.retain(|&r| r > 0);
        rows.sort_unstable_by(|a, b| b.cmp(a));
        Partition { rows }
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// `|λ|`
    pub fn size(&self) -> u32 {
        self.rows.iter().sum()
    }

    /// Number of nonzero rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.rows.first().copied().unwrap_or(0);
        Partition::new((1..=width).map(|c| self.rows.iter().filter(|&&r| r >= c).count() as u32).collect())
    }

    /// Hook lengths, row by row.
    pub fn hooks(&self) -> Vec<u32> {
        let conj = self.conjugate();
        let mut out = Vec::with_capacity(self.size() as usize);
        for (i, &r) in self.rows.iter().enumerate() {
            for j in 0..r as usize {
                out.push((r - j as u32) + (conj.rows[j] - i as u32) - 1);
            }
        }
        out
    }

    /// Contents `col - row` of all boxes.
    pub fn contents(&self) -> Vec<i64> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, &r)| (0..r as i64).map(move |j| j - i as i64))
            .collect()
    }

    /// Rows padded with zeros to length `n` and listed increasingly.
    pub fn increasing_rows(&self, n: usize) -> Option<Vec<u32>> {
        if self.rows.len() > n {
            return None;
        }
        let mut v = vec![0; n - self.rows.len()];
        v.extend(self.rows.iter().rev());
        Some(v)
    }

    /// Comma-joined decreasing rows, e.g. `3,1,1`.
    pub fn to_text(&self) -> String {
        self.rows.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }

    pub fn parse(s: &str) -> Result<Partition> {
        if s.trim().is_empty() {
            return Ok(Partition::default());
        }
        let rows: Vec<u32> = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| Error::domain(format!("bad partition {s:?}"))))
            .collect::<Result<_>>()?;
        if rows.windows(2).any(|w| w[0] < w[1]) || rows.contains(&0) {
            return Err(Error::domain(format!("partition rows must be positive and decreasing: {s:?}")));
        }
        Ok(Partition { rows })
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_text())
    }
}

/// Conjugacy class of `S_n` as multiplicities: `mult[p-1]` cycles of length `p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ClassVector {
    mult: Vec<u32>,
}

impl ClassVector {
    pub fn new(mut mult: Vec<u32>) -> Self {
        while mult.last() == Some(&0) {
            mult.pop();
        }
        ClassVector { mult }
    }

    /// Class whose cycle lengths are the parts of `cycle_type`.
    pub fn from_partition(cycle_type: &Partition) -> Self {
        Self::from_cycle_lengths(cycle_type.rows().iter().map(|&r| r as usize))
    }

    pub fn from_cycle_lengths(lengths: impl IntoIterator<Item = usize>) -> Self {
        let mut mult = Vec::new();
        for l in lengths {
            if mult.len() < l {
                mult.resize(l, 0);
            }
            mult[l - 1] += 1;
        }
        Self::new(mult)
    }

    pub fn mult(&self) -> &[u32] {
        &self.mult
    }

    /// Multiplicity of `p`-cycles.
    pub fn count(&self, p: usize) -> u32 {
        self.mult.get(p - 1).copied().unwrap_or(0)
    }

    /// `n = Σ p α_p`
    pub fn size(&self) -> u32 {
        self.mult.iter().enumerate().map(|(i, &m)| (i as u32 + 1) * m).sum()
    }

    /// Number of cycles `Σ α_p`.
    pub fn num_cycles(&self) -> u32 {
        self.mult.iter().sum()
    }

    pub fn to_partition(&self) -> Partition {
        let mut rows = Vec::new();
        for (i, &m) in self.mult.iter().enumerate().rev() {
            rows.extend(std::iter::repeat_n(i as u32 + 1, m as usize));
        }
        Partition { rows }
    }

    /// `z_α = ∏ p^{α_p} α_p!`, the centralizer order.
    pub fn z(&self) -> BigInt {
        self.mult.iter().enumerate().fold(BigInt::one(), |acc, (i, &m)| {
            acc * BigInt::from(i as u64 + 1).pow(m) * factorial(m as u64)
        })
    }

    /// Number of permutations in the class, `n!/z_α`.
    pub fn class_size(&self) -> BigInt {
        factorial(self.size() as u64) / self.z()
    }
}

impl fmt::Debug for ClassVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .mult
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(i, m)| format!("{}^{m}", i + 1))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// All partitions of `n` in reverse lexicographic order: `(n)`, `(n-1,1)`, …, `(1^n)`.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn rec(rest: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { rows: prefix.clone() });
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Remove one rim hook of length `r` in every possible way, via beta numbers.
/// Returns `(remaining partition, sign)` pairs.
fn remove_rim_hooks(lambda: &Partition, r: u32) -> Vec<(Partition, i64)> {
    let l = lambda.rows.len() as u32;
    let beta: Vec<u32> = lambda.rows.iter().enumerate().map(|(i, &x)| x + (l - 1 - i as u32)).collect();
    let mut out = Vec::new();
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let between = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut nb = beta.clone();
        nb[idx] = target;
        nb.sort_unstable_by(|a, b| b.cmp(a));
        let rows = nb.iter().enumerate().map(|(i, &x)| x - (l - 1 - i as u32)).collect();
        out.push((Partition::new(rows), if between % 2 == 0 { 1 } else { -1 }));
    }
    out
}

type CharMemo = HashMap<(Partition, Vec<u32>), i64>;

/// `cycles` sorted decreasingly; the largest cycle is stripped first.
fn mn_recursive(lambda: &Partition, cycles: &[u32], memo: &mut CharMemo) -> i64 {
    if cycles.is_empty() {
        return if lambda.is_empty() { 1 } else { 0 };
    }
    let key = (lambda.clone(), cycles.to_vec());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let value = remove_rim_hooks(lambda, cycles[0])
        .into_iter()
        .map(|(mu, sign)| sign * mn_recursive(&mu, &cycles[1..], memo))
        .sum();
    memo.insert(key, value);
    value
}

/// Character `χ̂_λ(α)` of the irreducible `S_n` representation `λ` on class `α`,
/// by the Murnaghan–Nakayama rule.
pub fn sn_character(lambda: &Partition, alpha: &ClassVector) -> Result<i64> {
    if lambda.size() != alpha.size() {
        return Err(Error::domain(format!(
            "sn_character: |λ| = {} but class has size {}",
            lambda.size(),
            alpha.size()
        )));
    }
    let cycles = alpha.to_partition().rows;
    Ok(mn_recursive(lambda, &cycles, &mut HashMap::new()))
}

/// `d̂_λ = n!/∏ hooks`.
pub fn sn_dimension(lambda: &Partition) -> BigInt {
    let hooks = lambda.hooks().iter().fold(BigInt::one(), |acc, &h| acc * BigInt::from(h));
    factorial(lambda.size() as u64) / hooks
}

/// `d_λ(N) = ∏_{boxes} (N + content) / hook` as a polynomial in formal `N`.
pub fn gl_dimension(lambda: &Partition) -> RatN {
    let hooks = lambda.hooks().iter().fold(BigInt::one(), |acc, &h| acc * BigInt::from(h));
    let num = lambda
        .contents()
        .into_iter()
        .fold(UPoly::constant(int(1)), |acc, c| acc.mul(&UPoly::linear(int(c))));
    RatN::from_poly(num.scale(&Rational::new(BigInt::one(), hooks)))
}

/// Full character table of `S_n`, rows and columns both indexed by
/// [`partitions`]`(n)` (columns read as cycle types).
#[derive(Clone, Debug)]
pub struct CharacterTable {
    n: u32,
    parts: Vec<Partition>,
    index: HashMap<Partition, usize>,
    table: Vec<Vec<i64>>,
}

impl CharacterTable {
    pub fn new(n: u32) -> Self {
        let parts = partitions(n);
        let mut memo = HashMap::new();
        let table = parts
            .iter()
            .map(|lambda| parts.iter().map(|mu| mn_recursive(lambda, &mu.rows, &mut memo)).collect())
            .collect();
        let index = parts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        CharacterTable { n, parts, index, table }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.parts
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// `χ̂_{parts[i]}(parts[j])`
    pub fn value(&self, irrep: usize, class: usize) -> i64 {
        self.table[irrep][class]
    }

    pub fn character(&self, lambda: &Partition, alpha: &ClassVector) -> Option<i64> {
        Some(self.table[self.index_of(lambda)?][self.index_of(&alpha.to_partition())?])
    }
}

/// Free cumulants `φ̄_1..φ̄_Q` from moments `θ̄_1..θ̄_Q`:
/// `φ̄_q = -Σ_{Σ iα_i = q} ((q + Σα_i - 2)!/(q-1)!) ∏_i (-θ̄_i)^{α_i}/α_i!`.
///
/// Works over any ring, so the moments may be numbers or formal polynomials.
pub fn moments_to_free_cumulants<R: Ring>(moments: &[R], q_max: usize) -> Result<Vec<R>> {
    if moments.len() < q_max {
        return Err(Error::domain(format!(
            "free cumulants up to order {q_max} need {q_max} moments, got {}",
            moments.len()
        )));
    }
    let mut out = Vec::with_capacity(q_max);
    for q in 1..=q_max {
        let mut acc = R::zero();
        for part in partitions(q as u32) {
            let alpha = ClassVector::from_partition(&part);
            let len = alpha.num_cycles() as u64;
            let mut coeff = Rational::new(
                factorial(q as u64 + len - 2),
                factorial(q as u64 - 1),
            );
            let mut term = R::one();
            for (i, &m) in alpha.mult().iter().enumerate() {
                if m == 0 {
                    continue;
                }
                coeff /= Rational::from_integer(factorial(m as u64));
                if m % 2 == 1 {
                    coeff = -coeff;
                }
                term = term.mul(&moments[i].pow(m));
            }
            acc = acc.sub(&term.scale(&coeff));
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, GradedPolynomial, Monomial};

    fn p(rows: &[u32]) -> Partition {
        Partition::new(rows.to_vec())
    }

    fn cls(lengths: &[usize]) -> ClassVector {
        ClassVector::from_cycle_lengths(lengths.iter().copied())
    }

    #[test]
    fn partition_counts_and_order() {
        assert_eq!(partitions(0), vec![Partition::default()]);
        let four: Vec<_> = partitions(4).iter().map(Partition::to_text).collect();
        assert_eq!(four, ["4", "3,1", "2,2", "2,1,1", "1,1,1,1"]);
        assert_eq!(partitions(8).len(), 22);
        let counts: Vec<usize> = (0..=10).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn partition_text_round_trip() {
        assert_eq!(Partition::parse("3,1,1").unwrap(), p(&[1, 3, 1]));
        assert!(Partition::parse("1,3").is_err());
        assert_eq!(p(&[3, 1]).increasing_rows(4), Some(vec![0, 0, 1, 3]));
        assert_eq!(p(&[1, 1, 1]).increasing_rows(2), None);
    }

    #[test]
    fn character_examples() {
        assert_eq!(sn_character(&p(&[4]), &cls(&[2, 1, 1])).unwrap(), 1);
        assert_eq!(sn_character(&p(&[1, 1, 1]), &cls(&[3])).unwrap(), 1);
        assert_eq!(sn_character(&p(&[2, 1]), &cls(&[3])).unwrap(), -1);
        assert!(sn_character(&p(&[2, 1]), &cls(&[2])).is_err());
    }

    /// Standard representation of S_3 built from explicit permutation
    /// matrices minus the trivial part: χ = (#fixed points) - 1.
    #[test]
    fn character_matches_fixed_point_count_for_hook() {
        for n in 2..=7u32 {
            let std_rep = Partition::new(vec![n - 1, 1]);
            for mu in partitions(n) {
                let alpha = ClassVector::from_partition(&mu);
                let fixed = alpha.count(1) as i64;
                assert_eq!(sn_character(&std_rep, &alpha).unwrap(), fixed - 1, "{mu:?}");
            }
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(sn_dimension(&p(&[5])), BigInt::from(1));
        assert_eq!(sn_dimension(&p(&[2, 1])), BigInt::from(2));
        assert_eq!(sn_dimension(&p(&[2, 2])), BigInt::from(2));
        assert_eq!(sn_dimension(&p(&[3, 2])), BigInt::from(5));
    }

    #[test]
    fn dimension_equals_identity_character() {
        for n in 1..=8 {
            let ident = cls(&vec![1; n as usize]);
            for lambda in partitions(n) {
                assert_eq!(BigInt::from(sn_character(&lambda, &ident).unwrap()), sn_dimension(&lambda));
            }
        }
    }

    #[test]
    fn column_orthogonality() {
        for n in 1..=6 {
            let table = CharacterTable::new(n);
            let parts = table.partitions();
            for (j, a) in parts.iter().enumerate() {
                for (k, _) in parts.iter().enumerate() {
                    let s: i64 = (0..parts.len()).map(|i| table.value(i, j) * table.value(i, k)).sum();
                    let expected = if j == k { ClassVector::from_partition(a).z() } else { BigInt::from(0) };
                    assert_eq!(BigInt::from(s), expected);
                }
            }
        }
    }

    #[test]
    fn gl_dimension_examples() {
        let n = |k: i64| int(k);
        assert_eq!(gl_dimension(&p(&[1])), RatN::n_pow(1));
        let sym2 = gl_dimension(&p(&[2]));
        let alt2 = gl_dimension(&p(&[1, 1]));
        for k in 1..6 {
            assert_eq!(sym2.eval(&n(k)).unwrap(), rat(k * (k + 1), 2));
            assert_eq!(alt2.eval(&n(k)).unwrap(), rat(k * (k - 1), 2));
        }
    }

    /// d̂_λ/d_λ at integer N equals n! ∏_p (p-1)!/(λ_p + p - 1)! with rows increasing.
    #[test]
    fn dimension_ratio_matches_factorial_formula() {
        for n in 1..=6u32 {
            for lambda in partitions(n) {
                for big_n in [lambda.len(), lambda.len() + 1, lambda.len() + 2, 7, 9] {
                    let rows = lambda.increasing_rows(big_n).unwrap();
                    let mut expected = Rational::from_integer(factorial(n as u64));
                    for (idx, &r) in rows.iter().enumerate() {
                        let p = idx as u64 + 1;
                        expected *= Rational::new(factorial(p - 1), factorial(r as u64 + p - 1));
                    }
                    let d = gl_dimension(&lambda).eval(&int(big_n as i64)).unwrap();
                    let ratio = Rational::from_integer(sn_dimension(&lambda)) / d;
                    assert_eq!(ratio, expected, "{lambda:?} N={big_n}");
                }
            }
        }
    }

    #[test]
    fn class_sizes() {
        assert_eq!(cls(&[1, 1, 1]).class_size(), BigInt::from(1));
        assert_eq!(cls(&[2, 1]).class_size(), BigInt::from(3));
        assert_eq!(cls(&[3]).class_size(), BigInt::from(2));
        let total: BigInt = partitions(6).iter().map(|mu| ClassVector::from_partition(mu).class_size()).sum();
        assert_eq!(total, factorial(6));
    }

    #[test]
    fn free_cumulant_examples() {
        let zero = vec![int(0); 4];
        assert!(moments_to_free_cumulants(&zero, 4).unwrap().iter().all(|c| *c == int(0)));

        let moments: Vec<GradedPolynomial> = (1..=3).map(GradedPolynomial::theta_bar).collect();
        let phi = moments_to_free_cumulants(&moments, 3).unwrap();
        assert_eq!(phi[0], GradedPolynomial::theta_bar(1));
        let expected2 = GradedPolynomial::from_terms([
            (Monomial::theta_bar(2), int(1)),
            (Monomial::new(vec![], vec![2]), int(-1)),
        ]);
        assert_eq!(phi[1], expected2);
        // φ̄_3 = θ̄3 - 3θ̄1θ̄2 + 2θ̄1^3
        let expected3 = GradedPolynomial::from_terms([
            (Monomial::theta_bar(3), int(1)),
            (Monomial::new(vec![], vec![1, 1]), int(-3)),
            (Monomial::new(vec![], vec![3]), int(2)),
        ]);
        assert_eq!(phi[2], expected3);
    }

    /// Free cumulants of the semicircle law with variance 1 are (0, 1, 0, 0, ...).
    #[test]
    fn semicircle_cumulants() {
        // moments 0, 1, 0, 2, 0, 5 (Catalan numbers)
        let m = [0, 1, 0, 2, 0, 5].map(int);
        let phi = moments_to_free_cumulants(&m, 6).unwrap();
        assert_eq!(phi, [0, 1, 0, 0, 0, 0].map(int).to_vec());
    }

    #[test]
    fn not_enough_moments() {
        assert!(moments_to_free_cumulants(&[int(1)], 2).is_err());
    }
}
