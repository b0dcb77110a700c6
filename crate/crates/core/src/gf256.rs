//! Arithmetic over GF(2^8).
//!
//! Elements are bytes interpreted as polynomials over GF(2) reduced modulo
//! x^8 + x^4 + x^3 + x^2 + 1 (0x11D). Addition is XOR; multiplication goes
//! through log/exp tables built at compile time. Row operations used by the
//! decoder have an SSSE3 path based on split-nibble shuffle tables.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};

/// Irreducible polynomial x^8 + x^4 + x^3 + x^2 + 1.
pub const IRREDUCIBLE_POLY: u16 = 0x11D;

const fn build_exp() -> [u8; 512] {
    let mut table = [0u8; 512];
    let mut val: u16 = 1;
    let mut i = 0;
    while i < 255 {
        table[i] = val as u8;
        table[i + 255] = val as u8;
        val <<= 1;
        if val & 0x100 != 0 {
            val ^= IRREDUCIBLE_POLY;
        }
        i += 1;
    }
    table[510] = table[0];
    table[511] = table[1];
    table
}

const fn build_log() -> [u8; 256] {
    let exp = build_exp();
    let mut table = [0u8; 256];
    let mut i = 0;
    while i < 255 {
        table[exp[i] as usize] = i as u8;
        i += 1;
    }
    table
}

static EXP: [u8; 512] = build_exp();
static LOG: [u8; 256] = build_log();

const fn slow_mul(a: u8, b: u8) -> u8 {
    let mut a = a as u16;
    let mut b = b;
    let mut acc: u16 = 0;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a <<= 1;
        if a & 0x100 != 0 {
            a ^= IRREDUCIBLE_POLY;
        }
        b >>= 1;
    }
    acc as u8
}

// NIBBLE[c] = (c * low nibble, c * (high nibble << 4)) for each of 16 nibbles.
const fn build_nibbles() -> [[[u8; 16]; 2]; 256] {
    let mut out = [[[0u8; 16]; 2]; 256];
    let mut c = 0;
    while c < 256 {
        let mut i = 0;
        while i < 16 {
            out[c][0][i] = slow_mul(c as u8, i as u8);
            out[c][1][i] = slow_mul(c as u8, (i << 4) as u8);
            i += 1;
        }
        c += 1;
    }
    out
}

static NIBBLE: [[[u8; 16]; 2]; 256] = build_nibbles();

/// An element of GF(2^8).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse, `None` for zero.
    #[inline]
    pub fn inv(self) -> Option<Gf256> {
        if self.0 == 0 {
            None
        } else {
            Some(Gf256(EXP[255 - LOG[self.0 as usize] as usize]))
        }
    }

    /// `self^exp` by repeated squaring on the log table.
    pub fn pow(self, exp: u32) -> Gf256 {
        if exp == 0 {
            return Gf256::ONE;
        }
        if self.0 == 0 {
            return Gf256::ZERO;
        }
        let log = LOG[self.0 as usize] as u64 * exp as u64 % 255;
        Gf256(EXP[log as usize])
    }
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

impl From<u8> for Gf256 {
    fn from(v: u8) -> Self {
        Gf256(v)
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl Add for Gf256 {
    type Output = Gf256;
    #[inline]
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl AddAssign for Gf256 {
    #[inline]
    fn add_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl Sub for Gf256 {
    type Output = Gf256;
    #[inline]
    fn sub(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    #[inline]
    fn mul(self, rhs: Gf256) -> Gf256 {
        Gf256(mul(self.0, rhs.0))
    }
}

impl MulAssign for Gf256 {
    #[inline]
    fn mul_assign(&mut self, rhs: Gf256) {
        self.0 = mul(self.0, rhs.0);
    }
}

#[allow(clippy::suspicious_arithmetic_impl, clippy::suspicious_op_assign_impl)]
impl Div for Gf256 {
    type Output = Gf256;
    /// Panics on division by zero.
    fn div(self, rhs: Gf256) -> Gf256 {
        let inv = rhs.inv().expect("division by zero in GF(256)");
        self * inv
    }
}

#[inline]
fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    EXP[LOG[a as usize] as usize + LOG[b as usize] as usize]
}

/// Field product on raw bytes.
#[inline]
pub fn field_mul(a: Gf256, b: Gf256) -> Gf256 {
    a * b
}

/// Field inverse on raw bytes; `None` for zero.
#[inline]
pub fn field_inv(a: Gf256) -> Option<Gf256> {
    a.inv()
}

/// `dst[i] ^= c * src[i]` for every i.
pub fn mul_add_row(dst: &mut [u8], src: &[u8], c: u8) {
    assert_eq!(dst.len(), src.len());
    match c {
        0 => {}
        1 => dst.iter_mut().zip(src).for_each(|(d, s)| *d ^= s),
        _ => {
            #[cfg(target_arch = "x86_64")]
            {
                if dst.len() >= 16 && std::arch::is_x86_feature_detected!("ssse3") {
                    // SAFETY: feature presence checked above.
                    unsafe { simd::mul_add_row_ssse3(dst, src, c) };
                    return;
                }
            }
            mul_add_row_scalar(dst, src, c);
        }
    }
}

/// `row[i] = c * row[i]` for every i.
pub fn scale_row(row: &mut [u8], c: u8) {
    match c {
        1 => {}
        0 => row.fill(0),
        _ => {
            let [lo, hi] = &NIBBLE[c as usize];
            for v in row.iter_mut() {
                *v = lo[(*v & 0x0f) as usize] ^ hi[(*v >> 4) as usize];
            }
        }
    }
}

fn mul_add_row_scalar(dst: &mut [u8], src: &[u8], c: u8) {
    let [lo, hi] = &NIBBLE[c as usize];
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= lo[(s & 0x0f) as usize] ^ hi[(s >> 4) as usize];
    }
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use super::{mul_add_row_scalar, NIBBLE};
    use std::arch::x86_64::*;

    #[target_feature(enable = "ssse3")]
    pub(super) unsafe fn mul_add_row_ssse3(dst: &mut [u8], src: &[u8], c: u8) {
        let [lo, hi] = &NIBBLE[c as usize];
        let lo_tbl = _mm_loadu_si128(lo.as_ptr() as *const __m128i);
        let hi_tbl = _mm_loadu_si128(hi.as_ptr() as *const __m128i);
        let mask = _mm_set1_epi8(0x0f);
        let chunks = dst.len() / 16;
        for i in 0..chunks {
            let off = i * 16;
            let s = _mm_loadu_si128(src.as_ptr().add(off) as *const __m128i);
            let d = _mm_loadu_si128(dst.as_ptr().add(off) as *const __m128i);
            let l = _mm_and_si128(s, mask);
            let h = _mm_and_si128(_mm_srli_epi64(s, 4), mask);
            let p = _mm_xor_si128(_mm_shuffle_epi8(lo_tbl, l), _mm_shuffle_epi8(hi_tbl, h));
            _mm_storeu_si128(dst.as_mut_ptr().add(off) as *mut __m128i, _mm_xor_si128(d, p));
        }
        let tail = chunks * 16;
        mul_add_row_scalar(&mut dst[tail..], &src[tail..], c);
    }
}

/// AVX2 kernel for callers that already run with the feature enabled.
#[cfg(target_arch = "x86_64")]
pub(crate) mod avx2 {
    use super::NIBBLE;
    use std::arch::x86_64::*;

    pub fn available() -> bool {
        std::arch::is_x86_feature_detected!("avx2")
    }

    /// `dst[i] ^= c * src[i]` over `lanes` blocks of 32 bytes.
    ///
    /// # Safety
    /// AVX2 must be available and both pointers valid for `32 * lanes` bytes.
    #[target_feature(enable = "avx2")]
    #[inline]
    pub unsafe fn mul_add(dst: *mut u8, src: *const u8, lanes: usize, c: u8) {
        let [lo, hi] = &NIBBLE[c as usize];
        let lo_tbl = _mm256_broadcastsi128_si256(_mm_loadu_si128(lo.as_ptr() as *const __m128i));
        let hi_tbl = _mm256_broadcastsi128_si256(_mm_loadu_si128(hi.as_ptr() as *const __m128i));
        let mask = _mm256_set1_epi8(0x0f);
        for i in 0..lanes {
            let s = _mm256_loadu_si256(src.add(32 * i) as *const __m256i);
            let d = _mm256_loadu_si256(dst.add(32 * i) as *const __m256i);
            let l = _mm256_and_si256(s, mask);
            let h = _mm256_and_si256(_mm256_srli_epi64(s, 4), mask);
            let p = _mm256_xor_si256(_mm256_shuffle_epi8(lo_tbl, l), _mm256_shuffle_epi8(hi_tbl, h));
            _mm256_storeu_si256(dst.add(32 * i) as *mut __m256i, _mm256_xor_si256(d, p));
        }
    }
}
