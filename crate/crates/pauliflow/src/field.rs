//! Arithmetic and rank computation over the binary extension fields GF(2^k),
//! 1 <= k <= 128.
//!
//! Elements are polynomials over GF(2) of degree below `k`, packed into a
//! `u128` and reduced modulo a fixed irreducible polynomial per degree.
//! Addition is XOR; multiplication is a carry-less product followed by
//! reduction. For `k <= 64` the product fits in a `u128` and reduction uses
//! a per-context byte table, which keeps Gaussian elimination fast; larger
//! degrees fall back to a shift-and-add loop.

use std::sync::Arc;
use thiserror::Error;

/// One irreducible polynomial per degree, lowest-weight first (trinomial
/// `x^k + x^a + 1` with minimal `a` when one exists, else the minimal
/// pentanomial). Entry `k-1` holds the low `k` bits; the leading `x^k`
/// term is implicit. Irreducibility is re-verified at context construction.
const REDUCTION_POLY_LOW: [u128; 128] = [
    0x1,        // k=1: x + 1
    0x3,        // k=2: x^2 + x + 1
    0x3,        // k=3: x^3 + x + 1
    0x3,        // k=4: x^4 + x + 1
    0x5,        // k=5: x^5 + x^2 + 1
    0x3,        // k=6: x^6 + x + 1
    0x3,        // k=7: x^7 + x + 1
    0x1b,       // k=8: x^8 + x^4 + x^3 + x + 1
    0x3,        // k=9: x^9 + x + 1
    0x9,        // k=10: x^10 + x^3 + 1
    0x5,        // k=11: x^11 + x^2 + 1
    0x9,        // k=12: x^12 + x^3 + 1
    0x1b,       // k=13: x^13 + x^4 + x^3 + x + 1
    0x21,       // k=14: x^14 + x^5 + 1
    0x3,        // k=15: x^15 + x + 1
    0x2b,       // k=16: x^16 + x^5 + x^3 + x + 1
    0x9,        // k=17: x^17 + x^3 + 1
    0x9,        // k=18: x^18 + x^3 + 1
    0x27,       // k=19: x^19 + x^5 + x^2 + x + 1
    0x9,        // k=20: x^20 + x^3 + 1
    0x5,        // k=21: x^21 + x^2 + 1
    0x3,        // k=22: x^22 + x + 1
    0x21,       // k=23: x^23 + x^5 + 1
    0x1b,       // k=24: x^24 + x^4 + x^3 + x + 1
    0x9,        // k=25: x^25 + x^3 + 1
    0x1b,       // k=26: x^26 + x^4 + x^3 + x + 1
    0x27,       // k=27: x^27 + x^5 + x^2 + x + 1
    0x3,        // k=28: x^28 + x + 1
    0x5,        // k=29: x^29 + x^2 + 1
    0x3,        // k=30: x^30 + x + 1
    0x9,        // k=31: x^31 + x^3 + 1
    0x8d,       // k=32: x^32 + x^7 + x^3 + x^2 + 1
    0x401,      // k=33: x^33 + x^10 + 1
    0x81,       // k=34: x^34 + x^7 + 1
    0x5,        // k=35: x^35 + x^2 + 1
    0x201,      // k=36: x^36 + x^9 + 1
    0x53,       // k=37: x^37 + x^6 + x^4 + x + 1
    0x63,       // k=38: x^38 + x^6 + x^5 + x + 1
    0x11,       // k=39: x^39 + x^4 + 1
    0x39,       // k=40: x^40 + x^5 + x^4 + x^3 + 1
    0x9,        // k=41: x^41 + x^3 + 1
    0x81,       // k=42: x^42 + x^7 + 1
    0x59,       // k=43: x^43 + x^6 + x^4 + x^3 + 1
    0x21,       // k=44: x^44 + x^5 + 1
    0x1b,       // k=45: x^45 + x^4 + x^3 + x + 1
    0x3,        // k=46: x^46 + x + 1
    0x21,       // k=47: x^47 + x^5 + 1
    0x2d,       // k=48: x^48 + x^5 + x^3 + x^2 + 1
    0x201,      // k=49: x^49 + x^9 + 1
    0x1d,       // k=50: x^50 + x^4 + x^3 + x^2 + 1
    0x4b,       // k=51: x^51 + x^6 + x^3 + x + 1
    0x9,        // k=52: x^52 + x^3 + 1
    0x47,       // k=53: x^53 + x^6 + x^2 + x + 1
    0x201,      // k=54: x^54 + x^9 + 1
    0x81,       // k=55: x^55 + x^7 + 1
    0x95,       // k=56: x^56 + x^7 + x^4 + x^2 + 1
    0x11,       // k=57: x^57 + x^4 + 1
    0x80001,    // k=58: x^58 + x^19 + 1
    0x95,       // k=59: x^59 + x^7 + x^4 + x^2 + 1
    0x3,        // k=60: x^60 + x + 1
    0x27,       // k=61: x^61 + x^5 + x^2 + x + 1
    0x20000001, // k=62: x^62 + x^29 + 1
    0x3,        // k=63: x^63 + x + 1
    0x1b,       // k=64: x^64 + x^4 + x^3 + x + 1
    0x40001,    // k=65: x^65 + x^18 + 1
    0x9,        // k=66: x^66 + x^3 + 1
    0x27,       // k=67: x^67 + x^5 + x^2 + x + 1
    0x201,      // k=68: x^68 + x^9 + 1
    0x65,       // k=69: x^69 + x^6 + x^5 + x^2 + 1
    0x2b,       // k=70: x^70 + x^5 + x^3 + x + 1
    0x41,       // k=71: x^71 + x^6 + 1
    0x609,      // k=72: x^72 + x^10 + x^9 + x^3 + 1
    0x2000001,  // k=73: x^73 + x^25 + 1
    0x800000001, // k=74: x^74 + x^35 + 1
    0x4b,       // k=75: x^75 + x^6 + x^3 + x + 1
    0x200001,   // k=76: x^76 + x^21 + 1
    0x65,       // k=77: x^77 + x^6 + x^5 + x^2 + 1
    0x69,       // k=78: x^78 + x^6 + x^5 + x^3 + 1
    0x201,      // k=79: x^79 + x^9 + 1
    0x215,      // k=80: x^80 + x^9 + x^4 + x^2 + 1
    0x11,       // k=81: x^81 + x^4 + 1
    0x10b,      // k=82: x^82 + x^8 + x^3 + x + 1
    0x95,       // k=83: x^83 + x^7 + x^4 + x^2 + 1
    0x21,       // k=84: x^84 + x^5 + 1
    0x107,      // k=85: x^85 + x^8 + x^2 + x + 1
    0x200001,   // k=86: x^86 + x^21 + 1
    0x2001,     // k=87: x^87 + x^13 + 1
    0xc5,       // k=88: x^88 + x^7 + x^6 + x^2 + 1
    0x4000000001, // k=89: x^89 + x^38 + 1
    0x8000001,  // k=90: x^90 + x^27 + 1
    0x123,      // k=91: x^91 + x^8 + x^5 + x + 1
    0x200001,   // k=92: x^92 + x^21 + 1
    0x5,        // k=93: x^93 + x^2 + 1
    0x200001,   // k=94: x^94 + x^21 + 1
    0x801,      // k=95: x^95 + x^11 + 1
    0x641,      // k=96: x^96 + x^10 + x^9 + x^6 + 1
    0x41,       // k=97: x^97 + x^6 + 1
    0x801,      // k=98: x^98 + x^11 + 1
    0x4b,       // k=99: x^99 + x^6 + x^3 + x + 1
    0x8001,     // k=100: x^100 + x^15 + 1
    0xc3,       // k=101: x^101 + x^7 + x^6 + x + 1
    0x20000001, // k=102: x^102 + x^29 + 1
    0x201,      // k=103: x^103 + x^9 + 1
    0x1b,       // k=104: x^104 + x^4 + x^3 + x + 1
    0x11,       // k=105: x^105 + x^4 + 1
    0x8001,     // k=106: x^106 + x^15 + 1
    0x291,      // k=107: x^107 + x^9 + x^7 + x^4 + 1
    0x20001,    // k=108: x^108 + x^17 + 1
    0x35,       // k=109: x^109 + x^5 + x^4 + x^2 + 1
    0x200000001, // k=110: x^110 + x^33 + 1
    0x401,      // k=111: x^111 + x^10 + 1
    0x39,       // k=112: x^112 + x^5 + x^4 + x^3 + 1
    0x201,      // k=113: x^113 + x^9 + 1
    0x2d,       // k=114: x^114 + x^5 + x^3 + x^2 + 1
    0x1a1,      // k=115: x^115 + x^8 + x^7 + x^5 + 1
    0x17,       // k=116: x^116 + x^4 + x^2 + x + 1
    0x27,       // k=117: x^117 + x^5 + x^2 + x + 1
    0x200000001, // k=118: x^118 + x^33 + 1
    0x101,      // k=119: x^119 + x^8 + 1
    0x1b,       // k=120: x^120 + x^4 + x^3 + x + 1
    0x40001,    // k=121: x^121 + x^18 + 1
    0x47,       // k=122: x^122 + x^6 + x^2 + x + 1
    0x5,        // k=123: x^123 + x^2 + 1
    0x80001,    // k=124: x^124 + x^19 + 1
    0xe1,       // k=125: x^125 + x^7 + x^6 + x^5 + 1
    0x200001,   // k=126: x^126 + x^21 + 1
    0x3,        // k=127: x^127 + x + 1
    0x87,       // k=128: x^128 + x^7 + x^2 + x + 1
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} outside supported range 1..=128")]
    DegreeOutOfRange(u32),
    #[error("division by zero in GF(2^{0})")]
    DivisionByZero(u32),
    #[error("reduction polynomial for degree {0} failed the irreducibility check")]
    ReduciblePolynomial(u32),
    #[error("element belongs to a different field context")]
    ContextMismatch,
}

/// An element of GF(2^k): the low `k` bits of the wrapped value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement(pub u128);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The field GF(2^k): degree plus reduction polynomial, with a precomputed
/// byte reduction table for the fast multiplication path.
#[derive(Debug, Clone)]
pub struct FieldContext {
    k: u32,
    poly_low: u128,
    mask: u128,
    /// red[i][b] = (b << (k + 8i)) mod P, used to fold carry-less products.
    red: Arc<Vec<[u128; 256]>>,
}

impl FieldContext {
    /// Constructs GF(2^k) from the embedded polynomial table.
    ///
    /// The table entry is re-verified: `x^(2^k) = x (mod P)` and
    /// `gcd(x^(2^(k/q)) - x, P) = 1` for every prime `q | k`.
    pub fn new(k: u32) -> Result<FieldContext, FieldError> {
        if !(1..=128).contains(&k) {
            return Err(FieldError::DegreeOutOfRange(k));
        }
        let poly_low = REDUCTION_POLY_LOW[(k - 1) as usize];
        if !poly::is_irreducible(poly_low, k) {
            return Err(FieldError::ReduciblePolynomial(k));
        }
        let mask = if k == 128 { u128::MAX } else { (1u128 << k) - 1 };
        let mut red = Vec::new();
        if k <= 64 {
            // high bits of a clmul product run from k to 2k-2
            let positions = ((k as usize).saturating_sub(1)).div_ceil(8);
            for i in 0..positions {
                let mut table = [0u128; 256];
                for (b, slot) in table.iter_mut().enumerate().skip(1) {
                    *slot = slow_reduce_shifted(b as u128, k + 8 * i as u32, poly_low, k);
                }
                red.push(table);
            }
        }
        Ok(FieldContext { k, poly_low, mask, red: Arc::new(red) })
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// The reduction polynomial as a bit vector including the leading term,
    /// lowest degree first.
    pub fn reduction_poly_bits(&self) -> Vec<bool> {
        let mut bits: Vec<bool> = (0..self.k).map(|i| (self.poly_low >> i) & 1 == 1).collect();
        bits.push(true);
        bits
    }

    pub fn element(&self, value: u128) -> FieldElement {
        FieldElement(value & self.mask)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        if self.k <= 64 {
            self.mul_fast(a.0 as u64, b.0 as u64)
        } else {
            self.mul_slow(a.0, b.0)
        }
    }

    /// Multiplicative inverse by Fermat: a^(2^k - 2).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero(self.k));
        }
        // a^(2^k - 2) = prod_{i=1}^{k-1} a^(2^i)
        let mut acc = FieldElement::ONE;
        let mut sq = a;
        for _ in 1..self.k {
            sq = self.mul(sq, sq);
            acc = self.mul(acc, sq);
        }
        Ok(acc)
    }

    /// Carry-less 64x64 product via a nibble table, then byte-table folding.
    fn mul_fast(&self, a: u64, b: u64) -> FieldElement {
        let mut tab = [0u128; 16];
        let a = a as u128;
        tab[1] = a;
        tab[2] = a << 1;
        tab[4] = a << 2;
        tab[8] = a << 3;
        for i in [3usize, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15] {
            tab[i] = tab[i & (i - 1)] ^ tab[i & i.wrapping_neg()];
        }
        let mut prod = 0u128;
        let mut bb = b;
        let mut shift = 0;
        while bb != 0 {
            prod ^= tab[(bb & 0xf) as usize] << shift;
            bb >>= 4;
            shift += 4;
        }
        let mut out = prod & self.mask;
        let mut high = prod >> self.k;
        let mut i = 0;
        while high != 0 {
            let byte = (high & 0xff) as usize;
            if byte != 0 {
                out ^= self.red[i][byte];
            }
            high >>= 8;
            i += 1;
        }
        FieldElement(out)
    }

    /// Shift-and-add product for 64 < k <= 128.
    fn mul_slow(&self, a: u128, b: u128) -> FieldElement {
        let mut acc = 0u128;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            if b == 0 {
                break;
            }
            let carry = (a >> (self.k - 1)) & 1;
            a = ((a << 1) & self.mask) ^ (self.poly_low * carry);
        }
        FieldElement(acc)
    }
}

/// Reduces `bits << shift` modulo the degree-k polynomial, bit by bit.
/// Only used to build the reduction tables.
fn slow_reduce_shifted(bits: u128, shift: u32, poly_low: u128, k: u32) -> u128 {
    // work limb by limb: value has degree < shift + 8 <= 2k
    let mut hi = 0u128; // bits k..
    let mut lo; // bits 0..k
    if shift >= k {
        hi = bits << (shift - k);
        lo = 0;
    } else {
        lo = bits << shift;
        if k < 128 {
            hi = lo >> k;
            lo &= (1u128 << k) - 1;
        }
    }
    while hi != 0 {
        let d = 127 - hi.leading_zeros(); // degree of hi part relative to k
        hi ^= 1u128 << d;
        let folded = poly_low << d; // may spill above k again
        if k < 128 {
            hi ^= folded >> k;
            lo ^= folded & ((1u128 << k) - 1);
        } else {
            lo ^= folded;
        }
    }
    lo
}

/// Polynomial helpers over GF(2) on three 64-bit limbs (degree <= 191),
/// enough to verify irreducibility of polynomials up to degree 128.
mod poly {
    /// Full polynomial with explicit leading term.
    #[derive(Clone, Copy, PartialEq, Eq)]
    pub struct P([u64; 3]);

    impl P {
        fn from_low_k(low: u128, k: u32) -> P {
            let mut p = P([low as u64, (low >> 64) as u64, 0]);
            p.set(k);
            p
        }

        fn from_u128(v: u128) -> P {
            P([v as u64, (v >> 64) as u64, 0])
        }

        fn set(&mut self, i: u32) {
            self.0[(i / 64) as usize] |= 1 << (i % 64);
        }

        fn get(&self, i: u32) -> bool {
            (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
        }

        fn is_zero(&self) -> bool {
            self.0 == [0; 3]
        }

        fn degree(&self) -> Option<u32> {
            for limb in (0..3).rev() {
                if self.0[limb] != 0 {
                    return Some(limb as u32 * 64 + 63 - self.0[limb].leading_zeros());
                }
            }
            None
        }

        fn xor_shifted(&mut self, other: &P, shift: u32) {
            for i in 0..3 {
                if other.0[i] == 0 {
                    continue;
                }
                let base = i as u32 * 64 + shift;
                let limb = (base / 64) as usize;
                let off = base % 64;
                self.0[limb] ^= other.0[i] << off;
                if off != 0 && limb + 1 < 3 {
                    self.0[limb + 1] ^= other.0[i] >> (64 - off);
                }
            }
        }

        fn rem(&self, m: &P) -> P {
            let md = m.degree().expect("modulus must be nonzero");
            let mut r = *self;
            while let Some(d) = r.degree() {
                if d < md {
                    break;
                }
                r.xor_shifted(m, d - md);
            }
            r
        }

        fn mulmod(&self, other: &P, m: &P) -> P {
            let mut acc = P([0; 3]);
            let md = m.degree().expect("modulus");
            let mut a = self.rem(m);
            for i in 0..=other.degree().unwrap_or(0) {
                if other.get(i) {
                    acc.xor_shifted(&a, 0);
                }
                // a <<= 1 (mod m)
                let mut shifted = P([0; 3]);
                shifted.xor_shifted(&a, 1);
                a = shifted;
                if a.get(md) {
                    a.xor_shifted(m, 0);
                }
            }
            acc.rem(m)
        }

        fn gcd(mut a: P, mut b: P) -> P {
            while !b.is_zero() {
                let r = a.rem(&b);
                a = b;
                b = r;
            }
            a
        }
    }

    fn prime_factors(mut n: u32) -> Vec<u32> {
        let mut fs = Vec::new();
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                fs.push(d);
                while n.is_multiple_of(d) {
                    n /= d;
                }
            }
            d += 1;
        }
        if n > 1 {
            fs.push(n);
        }
        fs
    }

    /// Rabin test: P of degree k is irreducible iff x^(2^k) = x mod P and
    /// gcd(x^(2^(k/q)) - x, P) = 1 for every prime q dividing k.
    pub fn is_irreducible(low: u128, k: u32) -> bool {
        let m = P::from_low_k(low, k);
        let x = P::from_u128(2);
        let x_pow = |i: u32| {
            let mut r = x;
            for _ in 0..i {
                r = r.mulmod(&r, &m);
            }
            r
        };
        let mut top = x_pow(k);
        top.xor_shifted(&x.rem(&m), 0);
        if !top.is_zero() {
            return false;
        }
        for q in prime_factors(k) {
            let mut h = x_pow(k / q);
            h.xor_shifted(&x.rem(&m), 0);
            if h.is_zero() {
                return false;
            }
            let g = P::gcd(m, h);
            if g.degree() != Some(0) {
                return false;
            }
        }
        true
    }
}

/// A dense matrix over a fixed GF(2^k).
#[derive(Debug, Clone)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
    ctx: FieldContext,
}

impl FieldMatrix {
    pub fn zero(rows: usize, cols: usize, ctx: FieldContext) -> Self {
        FieldMatrix { rows, cols, entries: vec![FieldElement::ZERO; rows * cols], ctx }
    }

    /// Lifts a GF(2) matrix into GF(2^k) (0/1 entries).
    pub fn lift(m: &crate::gf2::Gf2Matrix, ctx: FieldContext) -> Self {
        let mut out = Self::zero(m.rows(), m.cols(), ctx);
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if m.get(r, c) {
                    out.set(r, c, FieldElement::ONE);
                }
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> FieldMatrix {
        let mut out = Self::zero(self.cols, self.rows, self.ctx.clone());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Row rank by Gaussian elimination with exact field arithmetic.
    ///
    /// Pivots take the first nonzero entry in the current column, lowest
    /// row index first.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let ctx = m.ctx.clone();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let hit = (pivot_row..m.rows).find(|&r| !m.get(r, col).is_zero());
            let Some(r) = hit else { continue };
            if r != pivot_row {
                for c in 0..m.cols {
                    let (a, b) = (m.get(pivot_row, c), m.get(r, c));
                    m.set(pivot_row, c, b);
                    m.set(r, c, a);
                }
            }
            let pivot_inv = ctx.inv(m.get(pivot_row, col)).expect("pivot nonzero");
            for below in pivot_row + 1..m.rows {
                let factor = m.get(below, col);
                if factor.is_zero() {
                    continue;
                }
                let scale = ctx.mul(factor, pivot_inv);
                for c in col..m.cols {
                    let v = ctx.mul(scale, m.get(pivot_row, c));
                    let cur = m.get(below, c);
                    m.set(below, c, ctx.add(cur, v));
                }
            }
            pivot_row += 1;
        }
        pivot_row
    }
}
