//! Euclidean distance kernels over `f64` slices.
//!
//! The hot path is [`nearest_squared`], which scans a row-major matrix of
//! centroid vectors for the one closest to a query. On x86_64 hosts with
//! AVX2 and FMA the scan runs through a vectorised kernel selected at
//! runtime; everywhere else a portable four-accumulator loop is used.

/// Squared Euclidean distance. Callers guarantee `a.len() == b.len()`.
#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    #[cfg(target_arch = "x86_64")]
    {
        if has_avx2_fma() {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { x86::squared_euclidean(a, b) };
        }
    }
    portable::squared_euclidean(a, b)
}

/// Euclidean distance. Callers guarantee `a.len() == b.len()`.
#[inline]
pub fn euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Smallest squared distance between `query` and any `dim`-wide row of
/// `rows`. Returns `f64::INFINITY` when `rows` is empty.
///
/// Because `sqrt` is monotone and correctly rounded, `nearest_squared(..).sqrt()`
/// is bit-identical to taking the minimum of the per-row Euclidean distances.
pub fn nearest_squared(query: &[f64], rows: &[f64], dim: usize) -> f64 {
    debug_assert_eq!(query.len(), dim);
    debug_assert!(dim == 0 || rows.len().is_multiple_of(dim));
    if dim == 0 {
        return if rows.is_empty() { f64::INFINITY } else { 0.0 };
    }
    #[cfg(target_arch = "x86_64")]
    {
        if has_avx2_fma() {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { x86::nearest_squared(query, rows, dim) };
        }
    }
    portable::nearest_squared(query, rows, dim)
}

/// [`nearest_squared`] for several queries at once, written to `out`.
/// Each result is bit-identical to the single-query call; batching only
/// lets every row be loaded once per group of queries.
pub fn nearest_squared_batch(queries: &[&[f64]], rows: &[f64], dim: usize, out: &mut [f64]) {
    debug_assert_eq!(queries.len(), out.len());
    #[cfg(target_arch = "x86_64")]
    {
        if dim > 0 && has_avx2_fma() {
            for (qs, os) in queries.chunks(4).zip(out.chunks_mut(4)) {
                if let ([a, b, c, d], [oa, ob, oc, od]) = (qs, &mut *os) {
                    // SAFETY: the required CPU features were detected at runtime.
                    let r = unsafe { x86::nearest_squared4([a, b, c, d], rows, dim) };
                    (*oa, *ob, *oc, *od) = (r[0], r[1], r[2], r[3]);
                } else {
                    for (q, o) in qs.iter().zip(os.iter_mut()) {
                        *o = nearest_squared(q, rows, dim);
                    }
                }
            }
            return;
        }
    }
    for (q, o) in queries.iter().zip(out.iter_mut()) {
        *o = nearest_squared(q, rows, dim);
    }
}

#[cfg(target_arch = "x86_64")]
#[inline]
fn has_avx2_fma() -> bool {
    std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma")
}

mod portable {
    #[inline]
    pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
        let mut acc = [0.0f64; 4];
        let ca = a.chunks_exact(4);
        let cb = b.chunks_exact(4);
        let (ra, rb) = (ca.remainder(), cb.remainder());
        for (x, y) in ca.zip(cb) {
            for i in 0..4 {
                let d = x[i] - y[i];
                acc[i] += d * d;
            }
        }
        let mut tail = 0.0;
        for (x, y) in ra.iter().zip(rb) {
            let d = x - y;
            tail += d * d;
        }
        (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
    }

    pub fn nearest_squared(query: &[f64], rows: &[f64], dim: usize) -> f64 {
        rows.chunks_exact(dim)
            .map(|row| squared_euclidean(query, row))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use std::arch::x86_64::*;

    #[target_feature(enable = "avx2,fma")]
    pub unsafe fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len().min(b.len());
        let pa = a.as_ptr();
        let pb = b.as_ptr();
        let mut acc0 = _mm256_setzero_pd();
        let mut acc1 = _mm256_setzero_pd();
        let mut i = 0;
        while i + 8 <= n {
            let d0 = _mm256_sub_pd(
                _mm256_loadu_pd(pa.wrapping_add(i)),
                _mm256_loadu_pd(pb.wrapping_add(i)),
            );
            let d1 = _mm256_sub_pd(
                _mm256_loadu_pd(pa.wrapping_add(i + 4)),
                _mm256_loadu_pd(pb.wrapping_add(i + 4)),
            );
            acc0 = _mm256_fmadd_pd(d0, d0, acc0);
            acc1 = _mm256_fmadd_pd(d1, d1, acc1);
            i += 8;
        }
        if i + 4 <= n {
            let d0 = _mm256_sub_pd(
                _mm256_loadu_pd(pa.wrapping_add(i)),
                _mm256_loadu_pd(pb.wrapping_add(i)),
            );
            acc0 = _mm256_fmadd_pd(d0, d0, acc0);
            i += 4;
        }
        let mut sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
        while i < n {
            let d = *pa.wrapping_add(i) - *pb.wrapping_add(i);
            sum += d * d;
            i += 1;
        }
        sum
    }

    #[target_feature(enable = "avx2,fma")]
    pub unsafe fn nearest_squared(query: &[f64], rows: &[f64], dim: usize) -> f64 {
        let mut best = f64::INFINITY;
        for row in rows.chunks_exact(dim) {
            let d = squared_euclidean(query, row);
            if d < best {
                best = d;
            }
        }
        best
    }

    /// Four queries against every row. Per pair, the lane assignment and
    /// reduction order match [`squared_euclidean`] exactly.
    #[target_feature(enable = "avx2,fma")]
    pub unsafe fn nearest_squared4(q: [&[f64]; 4], rows: &[f64], dim: usize) -> [f64; 4] {
        let pq = q.map(|v| v.as_ptr());
        let mut best = [f64::INFINITY; 4];
        for row in rows.chunks_exact(dim) {
            let pr = row.as_ptr();
            let mut acc0 = [_mm256_setzero_pd(); 4];
            let mut acc1 = [_mm256_setzero_pd(); 4];
            let mut i = 0;
            while i + 8 <= dim {
                let r0 = _mm256_loadu_pd(pr.wrapping_add(i));
                let r1 = _mm256_loadu_pd(pr.wrapping_add(i + 4));
                for j in 0..4 {
                    let d0 = _mm256_sub_pd(_mm256_loadu_pd(pq[j].wrapping_add(i)), r0);
                    let d1 = _mm256_sub_pd(_mm256_loadu_pd(pq[j].wrapping_add(i + 4)), r1);
                    acc0[j] = _mm256_fmadd_pd(d0, d0, acc0[j]);
                    acc1[j] = _mm256_fmadd_pd(d1, d1, acc1[j]);
                }
                i += 8;
            }
            if i + 4 <= dim {
                let r0 = _mm256_loadu_pd(pr.wrapping_add(i));
                for j in 0..4 {
                    let d0 = _mm256_sub_pd(_mm256_loadu_pd(pq[j].wrapping_add(i)), r0);
                    acc0[j] = _mm256_fmadd_pd(d0, d0, acc0[j]);
                }
                i += 4;
            }
            for j in 0..4 {
                let mut sum = horizontal_sum(_mm256_add_pd(acc0[j], acc1[j]));
                for t in i..dim {
                    let d = *pq[j].wrapping_add(t) - *pr.wrapping_add(t);
                    sum += d * d;
                }
                if sum < best[j] {
                    best[j] = sum;
                }
            }
        }
        best
    }

    #[inline]
    #[target_feature(enable = "avx2")]
    unsafe fn horizontal_sum(v: __m256d) -> f64 {
        let lo = _mm256_castpd256_pd128(v);
        let hi = _mm256_extractf128_pd(v, 1);
        let pair = _mm_add_pd(lo, hi);
        let swapped = _mm_unpackhi_pd(pair, pair);
        _mm_cvtsd_f64(_mm_add_sd(pair, swapped))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_triple() {
        assert_eq!(euclidean_unchecked(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn kernels_agree_across_lengths() {
        for n in 0..40 {
            let a: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 1.13).cos() * 2.0).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            let fast = squared_euclidean(&a, &b);
            let port = portable::squared_euclidean(&a, &b);
            assert!((fast - naive).abs() <= 1e-12 * naive.max(1.0), "n={n}");
            assert!((port - naive).abs() <= 1e-12 * naive.max(1.0), "n={n}");
        }
    }

    #[test]
    fn nearest_of_empty_is_infinite() {
        assert_eq!(nearest_squared(&[1.0, 2.0], &[], 2), f64::INFINITY);
    }

    #[test]
    fn nearest_picks_minimum_row() {
        let rows = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(nearest_squared(&[10.0, 0.0], &rows, 2), 81.0);
    }

    #[test]
    fn batch_is_bit_identical_to_single() {
        for dim in 1..20 {
            let rows: Vec<f64> = (0..dim * 7)
                .map(|i| (i as f64 * 0.71).sin() * 4.0)
                .collect();
            let queries: Vec<Vec<f64>> = (0..9)
                .map(|q| {
                    (0..dim)
                        .map(|i| ((q * dim + i) as f64 * 0.29).cos())
                        .collect()
                })
                .collect();
            let refs: Vec<&[f64]> = queries.iter().map(Vec::as_slice).collect();
            let mut out = vec![0.0; refs.len()];
            nearest_squared_batch(&refs, &rows, dim, &mut out);
            for (q, got) in refs.iter().zip(&out) {
                assert_eq!(
                    got.to_bits(),
                    nearest_squared(q, &rows, dim).to_bits(),
                    "dim={dim}"
                );
            }
        }
    }
}
