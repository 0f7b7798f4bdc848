//! Exact integer-lattice membership via a row-style Hermite echelon form.
//!
//! The echelon is built by absorbing generators one at a time, which makes
//! incremental extension (adding atom slices of increasing length to one
//! basis) the same code path as building from scratch. A transform matrix is
//! carried along so that membership answers come with a witness combination
//! over the original generators.
//!
//! Entries live in machine words with checked arithmetic; any overflow
//! promotes the whole basis to arbitrary-precision integers, since integer
//! elimination can blow up coefficients even on small inputs.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Arithmetic needed by the echelon routines. `None` signals overflow and
/// triggers promotion; the big-integer impl never returns it.
trait Ent: Clone + PartialEq + std::fmt::Debug {
    fn from_i64(v: i64) -> Self;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
    /// Floor division; only called with positive divisors.
    fn div_floor(&self, o: &Self) -> Option<Self>;
    /// Exact division; only called when the divisor divides self.
    fn div_exact(&self, o: &Self) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
}

impl Ent for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn div_floor(&self, o: &Self) -> Option<Self> {
        self.checked_div_euclid(*o)
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        self.checked_div(*o)
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Ent for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn div_floor(&self, o: &Self) -> Option<Self> {
        Some(Integer::div_floor(self, o))
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// `(d, x, y)` with `d = x·a + y·b`, `d > 0` (unless both inputs are zero).
fn xgcd<T: Ent>(a: &T, b: &T) -> Option<(T, T, T)> {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (T::from_i64(1), T::from_i64(0));
    let (mut t0, mut t1) = (T::from_i64(0), T::from_i64(1));
    while !r1.is_zero() {
        // Euclidean step with nonnegative remainder keeps r decreasing.
        let q = if r1.is_negative() {
            let nr1 = r1.neg()?;
            r0.div_floor(&nr1)?.neg()?
        } else {
            r0.div_floor(&r1)?
        };
        let next = |x0: &T, x1: &T| -> Option<T> { x0.sub(&q.mul(x1)?) };
        let (nr, ns, nt) = (next(&r0, &r1)?, next(&s0, &s1)?, next(&t0, &t1)?);
        r0 = r1;
        r1 = nr;
        s0 = s1;
        s1 = ns;
        t0 = t1;
        t1 = nt;
    }
    if r0.is_negative() {
        Some((r0.neg()?, s0.neg()?, t0.neg()?))
    } else {
        Some((r0, s0, t0))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct EchRow<T> {
    v: Vec<T>,
    /// Combination over the original generators producing `v`.
    t: Vec<T>,
    pivot: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Echelon<T> {
    dim: usize,
    gen_count: usize,
    rows: Vec<EchRow<T>>,
}

fn vec_axpy<T: Ent>(dst: &mut [T], q: &T, src: &[T]) -> Option<()> {
    // dst -= q * src
    for (d, s) in dst.iter_mut().zip(src) {
        *d = d.sub(&q.mul(s)?)?;
    }
    Some(())
}

fn vec_combine<T: Ent>(x: &T, a: &[T], y: &T, b: &[T]) -> Option<Vec<T>> {
    a.iter()
        .zip(b)
        .map(|(ai, bi)| x.mul(ai)?.add(&y.mul(bi)?))
        .collect()
}

impl<T: Ent> Echelon<T> {
    fn new(dim: usize) -> Echelon<T> {
        Echelon { dim, gen_count: 0, rows: Vec::new() }
    }

    /// Adds one generator, restoring canonical Hermite echelon form.
    fn absorb(&mut self, gen: &[i64]) -> Option<()> {
        for row in &mut self.rows {
            row.t.push(T::zero());
        }
        self.gen_count += 1;
        let mut w: Vec<T> = gen.iter().map(|&x| T::from_i64(x)).collect();
        let mut wt: Vec<T> = vec![T::zero(); self.gen_count];
        wt[self.gen_count - 1] = T::from_i64(1);

        let mut i = 0;
        loop {
            let Some(c) = w.iter().position(|x| !x.is_zero()) else {
                // Dependent generator: pivot values may still have shrunk
                // during gcd combines, so re-canonicalize.
                return self.normalize();
            };
            if i == self.rows.len() || self.rows[i].pivot > c {
                if w[c].is_negative() {
                    for x in w.iter_mut().chain(wt.iter_mut()) {
                        *x = x.neg()?;
                    }
                }
                self.rows.insert(i, EchRow { v: w, t: wt, pivot: c });
                return self.normalize();
            }
            let p = self.rows[i].pivot;
            if p < c {
                i += 1;
                continue;
            }
            // p == c: cancel w's entry against this pivot.
            let h = self.rows[i].v[p].clone();
            let a = w[p].clone();
            let q = a.div_floor(&h)?;
            let rem = a.sub(&q.mul(&h)?)?;
            if rem.is_zero() {
                vec_axpy(&mut w, &q, &self.rows[i].v)?;
                vec_axpy(&mut wt, &q, &self.rows[i].t)?;
            } else {
                let (d, x, y) = xgcd(&h, &a)?;
                let new_v = vec_combine(&x, &self.rows[i].v, &y, &w)?;
                let new_t = vec_combine(&x, &self.rows[i].t, &y, &wt)?;
                let hd = h.div_exact(&d)?;
                let ad = a.div_exact(&d)?;
                let old_v = std::mem::replace(&mut self.rows[i].v, new_v);
                let old_t = std::mem::replace(&mut self.rows[i].t, new_t);
                w = vec_combine(&hd, &w, &ad.neg()?, &old_v)?;
                wt = vec_combine(&hd, &wt, &ad.neg()?, &old_t)?;
            }
        }
    }

    /// Reduces every entry sitting above a pivot into `[0, pivot)`.
    fn normalize(&mut self) -> Option<()> {
        for i in 0..self.rows.len() {
            for j in (i + 1)..self.rows.len() {
                let pj = self.rows[j].pivot;
                let hj = self.rows[j].v[pj].clone();
                let q = self.rows[i].v[pj].div_floor(&hj)?;
                if !q.is_zero() {
                    let (vj, tj) = (self.rows[j].v.clone(), self.rows[j].t.clone());
                    vec_axpy(&mut self.rows[i].v, &q, &vj)?;
                    vec_axpy(&mut self.rows[i].t, &q, &tj)?;
                }
            }
        }
        Some(())
    }

    /// Reduces `v` by the echelon; on membership returns the coefficients
    /// over the original generators.
    fn member_witness(&self, v: &[i64]) -> Option<Option<Vec<BigInt>>> {
        let mut w: Vec<T> = v.iter().map(|&x| T::from_i64(x)).collect();
        let mut coeffs: Vec<BigInt> = vec![BigInt::zero(); self.gen_count];
        for row in &self.rows {
            let c = w[row.pivot].clone();
            if c.is_zero() {
                continue;
            }
            let h = &row.v[row.pivot];
            let q = c.div_floor(h)?;
            if !c.sub(&q.mul(h)?)?.is_zero() {
                return Some(None); // pivot coordinate not divisible
            }
            vec_axpy(&mut w, &q, &row.v)?;
            for (acc, ti) in coeffs.iter_mut().zip(&row.t) {
                *acc += q.to_bigint() * ti.to_bigint();
            }
        }
        if w.iter().all(|x| x.is_zero()) {
            Some(Some(coeffs))
        } else {
            Some(None)
        }
    }

    fn rows_as_bigint(&self) -> Vec<Vec<BigInt>> {
        self.rows.iter().map(|r| r.v.iter().map(Ent::to_bigint).collect()).collect()
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Word(Echelon<i64>),
    Big(Echelon<BigInt>),
}

/// Canonical basis of the integer span of a generator list, with cached
/// echelon form, pivot bookkeeping and the generator transform.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    dim: usize,
    gens: Vec<Vec<i64>>,
    repr: Repr,
}

impl LatticeBasis {
    /// The zero lattice in ambient dimension `dim`.
    pub fn empty(dim: usize) -> LatticeBasis {
        LatticeBasis { dim, gens: Vec::new(), repr: Repr::Word(Echelon::new(dim)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        match &self.repr {
            Repr::Word(e) => e.rows.len(),
            Repr::Big(e) => e.rows.len(),
        }
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.gens
    }

    /// Echelon rows: pivots positive, entries above each pivot in `[0, pivot)`.
    pub fn echelon_rows(&self) -> Vec<Vec<BigInt>> {
        match &self.repr {
            Repr::Word(e) => e.rows_as_bigint(),
            Repr::Big(e) => e.rows_as_bigint(),
        }
    }

    fn check_arity(&self, v: &[i64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::ArityMismatch { expected: self.dim, got: v.len() });
        }
        Ok(())
    }

    /// New basis spanning this lattice plus the given generators.
    pub fn extended(&self, more: &[Vec<i64>]) -> Result<LatticeBasis> {
        for g in more {
            self.check_arity(g)?;
        }
        let mut out = self.clone();
        for g in more {
            out.gens.push(g.clone());
            let absorbed = match &mut out.repr {
                Repr::Word(e) => e.absorb(g).is_some(),
                Repr::Big(e) => {
                    e.absorb(g).expect("bigint echelon cannot overflow");
                    true
                }
            };
            if !absorbed {
                out.promote();
            }
        }
        Ok(out)
    }

    /// Rebuilds the echelon over big integers from the stored generators.
    fn promote(&mut self) {
        let mut e: Echelon<BigInt> = Echelon::new(self.dim);
        for g in &self.gens {
            e.absorb(g).expect("bigint echelon cannot overflow");
        }
        self.repr = Repr::Big(e);
    }

    /// True iff `v` is an integer combination of the generators.
    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        Ok(self.witness(v)?.is_some())
    }

    /// Membership with coefficient recovery: `Some(c)` means
    /// `v = Σ c_k · gens[k]` exactly.
    pub fn witness(&self, v: &[i64]) -> Result<Option<Vec<BigInt>>> {
        self.check_arity(v)?;
        match &self.repr {
            Repr::Word(e) => match e.member_witness(v) {
                Some(ans) => Ok(ans),
                None => {
                    // Overflow during reduction: redo in big integers.
                    let mut big: Echelon<BigInt> = Echelon::new(self.dim);
                    for g in &self.gens {
                        big.absorb(g).expect("bigint echelon cannot overflow");
                    }
                    Ok(big.member_witness(v).expect("bigint reduction cannot overflow"))
                }
            },
            Repr::Big(e) => Ok(e.member_witness(v).expect("bigint reduction cannot overflow")),
        }
    }

    pub(crate) fn is_promoted(&self) -> bool {
        matches!(self.repr, Repr::Big(_))
    }
}

/// Canonical Hermite echelon basis of the integer span of `generators`.
pub fn hermite_form(dim: usize, generators: &[Vec<i64>]) -> Result<LatticeBasis> {
    LatticeBasis::empty(dim).extended(generators)
}

/// Exhaustive membership search over the coefficient box
/// `[-coeff_bound, coeff_bound]^k`. Sound, and complete only within the box;
/// used exclusively as a cross-check oracle.
pub fn naive_lattice_contains(
    generators: &[Vec<i64>],
    v: &[i64],
    coeff_bound: i64,
) -> Result<bool> {
    let k = generators.len();
    let dim = v.len();
    if k > 6 || dim > 5 || coeff_bound > 8 {
        return Err(Error::InstanceTooLarge);
    }
    for g in generators {
        if g.len() != dim {
            return Err(Error::ArityMismatch { expected: dim, got: g.len() });
        }
    }
    let target: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    if k == 0 {
        return Ok(target.iter().all(|&x| x == 0));
    }
    let mut coeffs = vec![-coeff_bound; k];
    let mut sum: Vec<i128> = (0..dim)
        .map(|d| generators.iter().map(|g| g[d] as i128 * -coeff_bound as i128).sum())
        .collect();
    loop {
        if sum == target {
            return Ok(true);
        }
        // odometer step, updating the running sum
        let mut j = 0;
        loop {
            if j == k {
                return Ok(false);
            }
            if coeffs[j] < coeff_bound {
                coeffs[j] += 1;
                for d in 0..dim {
                    sum[d] += generators[j][d] as i128;
                }
                break;
            }
            coeffs[j] = -coeff_bound;
            for d in 0..dim {
                sum[d] -= 2 * coeff_bound as i128 * generators[j][d] as i128;
            }
            j += 1;
        }
    }
}
