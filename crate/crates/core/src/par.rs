//! Data-parallel helpers with a deterministic reduction order.
//!
//! With the `parallel` feature the element-wise work runs on rayon; without it
//! the same code paths run sequentially. Reductions are always performed over
//! fixed-size chunks whose partial sums are combined in index order, so the
//! result is bit-identical regardless of the feature or the thread count.

/// Chunk length used by every reduction.
pub const CHUNK: usize = 4096;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..len`, preserving index order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sum of `f(i)` for `i in 0..len`, reduced chunk by chunk in index order.
pub fn sum_indexed<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(len);
        let mut acc = 0.0;
        for i in start..end {
            acc += f(i);
        }
        acc
    });
    partials.iter().sum()
}

/// Deterministic dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_indexed(a.len(), |i| a[i] * b[i])
}

/// Applies `f` to every element of `out` together with its index.
pub fn for_each_mut<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_is_order_stable() {
        let n = 3 * CHUNK + 17;
        let a = sum_indexed(n, |i| 1.0 / (i as f64 + 1.0));
        let b = sum_indexed(n, |i| 1.0 / (i as f64 + 1.0));
        assert_eq!(a.to_bits(), b.to_bits());
        let exact: f64 = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).sum();
        assert!((a - exact).abs() < 1e-12);
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(10_000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
