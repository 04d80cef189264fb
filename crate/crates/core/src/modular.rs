//! Linear algebra modulo word-sized primes, Chinese remaindering and rational
//! reconstruction.
//!
//! Gaussian rationals are reduced through the two embeddings
//! `i -> +iota, i -> -iota` where `iota^2 = -1 (mod p)`; both are needed to
//! recover the real and imaginary parts separately. Results obtained this
//! way are candidates only and are always checked exactly by the caller.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Qi;

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        None
    } else {
        Some(pow_mod(a, p - 2, p))
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime `p = 1 (mod 4)` together with a square root of `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussianPrime {
    pub p: u64,
    pub iota: u64,
}

impl GaussianPrime {
    pub fn new(p: u64) -> Option<Self> {
        if p % 4 != 1 || !is_prime(p) {
            return None;
        }
        let e = (p - 1) / 4;
        (2..).find_map(|c| {
            let r = pow_mod(c, e, p);
            (mul_mod(r, r, p) == p - 1).then_some(GaussianPrime { p, iota: r })
        })
    }

    /// The conjugate embedding `i -> -iota`.
    pub fn conjugate(self) -> Self {
        GaussianPrime {
            p: self.p,
            iota: self.p - self.iota,
        }
    }

    pub fn reduce_int(&self, n: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let r = n.mod_floor(&m);
        r.to_u64().expect("residue fits in u64")
    }

    pub fn reduce_rational(&self, r: &BigRational) -> Option<u64> {
        let n = self.reduce_int(r.numer());
        let d = inv_mod(self.reduce_int(r.denom()), self.p)?;
        Some(mul_mod(n, d, self.p))
    }

    /// Image of `a + b i`; `None` when `p` divides a denominator.
    pub fn reduce(&self, z: &Qi) -> Option<u64> {
        let a = self.reduce_rational(&z.re)?;
        let b = self.reduce_rational(&z.im)?;
        Some((a + mul_mod(b, self.iota, self.p)) % self.p)
    }
}

/// `count` distinct Gaussian primes just below `2^62`, chosen by `seed`.
pub fn gaussian_primes(count: usize, seed: u64) -> Vec<GaussianPrime> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out: Vec<GaussianPrime> = Vec::with_capacity(count);
    while out.len() < count {
        let mut cand = (1u64 << 62) - rng.gen_range(0..(1u64 << 40));
        cand = cand - (cand % 4) + 1;
        if let Some(gp) = GaussianPrime::new(cand) {
            if !out.iter().any(|q| q.p == gp.p) {
                out.push(gp);
            }
        }
    }
    out
}

/// Dense matrix over `F_p`.
#[derive(Clone, Debug)]
pub struct ModMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        ModMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    /// Reduce a Gaussian-rational matrix; `None` if a denominator vanishes.
    pub fn from_qi_rows(gp: GaussianPrime, rows: &[Vec<Qi>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(gp.p, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                m.data[i * c + j] = gp.reduce(z)?;
            }
        }
        Some(m)
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = inv_mod(self.data[r * cols + c], p).expect("nonzero pivot");
            for j in c..cols {
                self.data[r * cols + j] = mul_mod(self.data[r * cols + j], inv, p);
            }
            let pivot_row: Vec<u64> = self.data[r * cols..(r + 1) * cols].to_vec();
            let nz: Vec<usize> = (c..cols).filter(|&j| pivot_row[j] != 0).collect();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                let nf = p - f;
                for &j in &nz {
                    let v = self.data[i * cols + j];
                    self.data[i * cols + j] = (v + mul_mod(nf, pivot_row[j], p)) % p;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }
}

/// Chinese remaindering of residues `r_k mod p_k` to a symmetric residue.
pub fn crt(residues: &[u64], primes: &[u64]) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (&r, &p) in residues.iter().zip(primes) {
        let pb = BigInt::from(p);
        // x' = x + m * ((r - x) * m^{-1} mod p)
        let xm = (&x).mod_floor(&pb).to_u64().unwrap();
        let mm = (&m).mod_floor(&pb).to_u64().unwrap();
        let minv = inv_mod(mm, p).expect("moduli are coprime");
        let t = mul_mod((r + p - xm) % p, minv, p);
        x += &m * BigInt::from(t);
        m *= pb;
    }
    (x, m)
}

/// Rational reconstruction: find `n/d = x (mod m)` with `|n|, d <= sqrt(m/2)`.
pub fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m >> 1u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (n, d) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    if n.gcd(&d) != BigInt::one() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Residues of one Gaussian-rational quantity under both embeddings of a
/// prime.
#[derive(Clone, Copy, Debug)]
pub struct EmbeddedResidue {
    pub prime: GaussianPrime,
    pub plus: u64,
    pub minus: u64,
}

/// Recover `a + b i` from residues of `a + b iota` and `a - b iota`.
pub fn reconstruct_qi(images: &[EmbeddedResidue]) -> Option<Qi> {
    let mut re = Vec::with_capacity(images.len());
    let mut im = Vec::with_capacity(images.len());
    let mut ps = Vec::with_capacity(images.len());
    for e in images {
        let p = e.prime.p;
        let inv2 = inv_mod(2, p)?;
        let a = mul_mod((e.plus + e.minus) % p, inv2, p);
        let two_iota_inv = inv_mod(mul_mod(2, e.prime.iota, p), p)?;
        let b = mul_mod((e.plus + p - e.minus) % p, two_iota_inv, p);
        re.push(a);
        im.push(b);
        ps.push(p);
    }
    let (xa, m) = crt(&re, &ps);
    let (xb, _) = crt(&im, &ps);
    Some(Qi::new(
        rational_reconstruct(&xa, &m)?,
        rational_reconstruct(&xb, &m)?,
    ))
}

/// Reconstruct a whole vector; `None` if any entry fails.
pub fn reconstruct_qi_vector(per_prime: &[(GaussianPrime, Vec<u64>, Vec<u64>)]) -> Option<Vec<Qi>> {
    let n = per_prime.first()?.1.len();
    (0..n)
        .map(|k| {
            let imgs: Vec<EmbeddedResidue> = per_prime
                .iter()
                .map(|(gp, plus, minus)| EmbeddedResidue {
                    prime: *gp,
                    plus: plus[k],
                    minus: minus[k],
                })
                .collect();
            reconstruct_qi(&imgs)
        })
        .collect()
}

/// Sparse linear system over `Q(i)` given by rows of `(column, value)`.
#[derive(Clone, Debug, Default)]
pub struct SparseSystem {
    pub cols: usize,
    pub rows: Vec<Vec<(usize, Qi)>>,
    pub rhs: Vec<Qi>,
}

impl SparseSystem {
    pub fn new(cols: usize) -> Self {
        SparseSystem {
            cols,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<(usize, Qi)>, rhs: Qi) {
        if row.is_empty() && rhs == Qi::default() {
            return;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    fn reduce(&self, gp: GaussianPrime, with_rhs: bool) -> Option<ModMatrix> {
        let cols = self.cols + usize::from(with_rhs);
        let mut m = ModMatrix::zeros(gp.p, self.rows.len(), cols);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                let cur = m.get(i, *j);
                m.set(i, *j, (cur + gp.reduce(v)?) % gp.p);
            }
            if with_rhs {
                m.set(i, self.cols, gp.reduce(&self.rhs[i])?);
            }
        }
        Some(m)
    }

    /// Nullity of the homogeneous part modulo `gp`, an upper bound for the
    /// exact nullity.
    pub fn nullity_mod(&self, gp: GaussianPrime) -> Option<usize> {
        let m = self.reduce(gp, false)?;
        Some(self.cols - m.rank())
    }

    /// Whether `x` satisfies every equation exactly.
    pub fn check(&self, x: &[Qi]) -> bool {
        self.rows.iter().zip(&self.rhs).all(|(row, b)| {
            let lhs = row
                .iter()
                .fold(Qi::default(), |acc, (j, v)| acc + v * &x[*j]);
            &lhs == b
        })
    }

    fn solve_mod(&self, gp: GaussianPrime) -> Option<(Vec<usize>, Vec<u64>)> {
        let mut m = self.reduce(gp, true)?;
        let pivots = m.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (k, &pc) in pivots.iter().enumerate() {
            x[pc] = m.get(k, self.cols);
        }
        Some((pivots, x))
    }

    /// Unique exact solution by multi-modular solving, reconstruction and
    /// exact verification.
    pub fn solve_unique(&self, seed: u64) -> Result<Vec<Qi>> {
        let mut images: Vec<(GaussianPrime, Vec<u64>, Vec<u64>)> = Vec::new();
        let mut last: Option<Vec<Qi>> = None;
        for gp in gaussian_primes(64, seed) {
            let (Some((piv_a, xa)), Some((piv_b, xb))) =
                (self.solve_mod(gp), self.solve_mod(gp.conjugate()))
            else {
                continue;
            };
            if piv_a.len() < self.cols || piv_b.len() < self.cols {
                return Err(Error::RankDeficient(format!(
                    "system with {} unknowns has rank {} modulo {}",
                    self.cols,
                    piv_a.len(),
                    gp.p
                )));
            }
            images.push((gp, xa, xb));
            let Some(cand) = reconstruct_qi_vector(&images) else {
                continue;
            };
            if last.as_ref() == Some(&cand) && self.check(&cand) {
                return Ok(cand);
            }
            last = Some(cand);
        }
        Err(Error::Reconstruction(format!(
            "no verified solution for a {}x{} system",
            self.rows.len(),
            self.cols
        )))
    }
}

/// Exact reduced row echelon form of a Gaussian-rational matrix with exactly
/// `expected_rank` nonzero rows, computed modularly and returned unverified
/// together with its pivot columns. Callers verify the candidate.
pub fn rref_multimodular(
    rows: &[Vec<Qi>],
    expected_rank: usize,
    seed: u64,
    mut verify: impl FnMut(&[usize], &[Vec<Qi>]) -> bool,
) -> Result<(Vec<usize>, Vec<Vec<Qi>>)> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut images: Vec<(GaussianPrime, Vec<u64>, Vec<u64>)> = Vec::new();
    let mut pivots_ref: Option<Vec<usize>> = None;
    let mut last: Option<Vec<Qi>> = None;
    for gp in gaussian_primes(64, seed) {
        let (Some(mut a), Some(mut b)) = (
            ModMatrix::from_qi_rows(gp, rows),
            ModMatrix::from_qi_rows(gp.conjugate(), rows),
        ) else {
            continue;
        };
        let pa = a.rref_in_place();
        let pb = b.rref_in_place();
        if pa != pb {
            continue;
        }
        if pa.len() != expected_rank {
            if pa.len() > expected_rank {
                return Err(Error::RankDeficient(format!(
                    "modular rank {} exceeds the expected {expected_rank}",
                    pa.len()
                )));
            }
            // Unlucky prime or genuinely deficient: a few retries decide.
            if images.is_empty() && pivots_ref.is_none() {
                pivots_ref = Some(Vec::new());
                continue;
            }
            return Err(Error::RankDeficient(format!(
                "modular rank {} below the expected {expected_rank}",
                pa.len()
            )));
        }
        if let Some(prev) = &pivots_ref {
            if !prev.is_empty() && prev != &pa {
                return Err(Error::Reconstruction("pivot pattern changed between primes".into()));
            }
        }
        pivots_ref = Some(pa.clone());
        let flat_a: Vec<u64> = a.data[..expected_rank * cols].to_vec();
        let flat_b: Vec<u64> = b.data[..expected_rank * cols].to_vec();
        images.push((gp, flat_a, flat_b));
        let Some(flat) = reconstruct_qi_vector(&images) else {
            continue;
        };
        if last.as_ref() == Some(&flat) {
            let cand: Vec<Vec<Qi>> = flat.chunks(cols).map(<[Qi]>::to_vec).collect();
            if verify(&pa, &cand) {
                return Ok((pa, cand));
            }
        }
        last = Some(flat);
    }
    Err(Error::Reconstruction(format!(
        "reduced echelon form of a {}x{cols} matrix did not stabilize",
        rows.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, qi_parts, rat};

    #[test]
    fn gaussian_prime_has_square_root_of_minus_one() {
        for gp in gaussian_primes(4, 7) {
            assert_eq!(gp.p % 4, 1);
            assert_eq!(mul_mod(gp.iota, gp.iota, gp.p), gp.p - 1);
            assert!(gp.p > 1 << 61);
        }
    }

    #[test]
    fn crt_and_reconstruction() {
        let gps = gaussian_primes(3, 1);
        let z = qi_parts(rat(-7, 12), rat(5, 3));
        let imgs: Vec<EmbeddedResidue> = gps
            .iter()
            .map(|gp| EmbeddedResidue {
                prime: *gp,
                plus: gp.reduce(&z).unwrap(),
                minus: gp.conjugate().reduce(&z).unwrap(),
            })
            .collect();
        assert_eq!(reconstruct_qi(&imgs).unwrap(), z);
    }

    #[test]
    fn sparse_solve_small_system() {
        let mut sys = SparseSystem::new(2);
        sys.push(vec![(0, qi(1, 1)), (1, qi(1, 1))], qi(3, 1));
        sys.push(vec![(0, qi(1, 1)), (1, qi_parts(rat(0, 1), rat(1, 1)))], qi(1, 2));
        let x = sys.solve_unique(3).unwrap();
        assert!(sys.check(&x));
    }
}
