//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the rayon pool; without it the same closures run sequentially. Results are
//! always returned in input order so reductions stay deterministic.

/// Map `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Map `f` over `0..n`, preserving order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Whether the crate was built with the rayon backend.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Size the global pool. Only the first call has an effect; returns false
/// when the pool was already built or the crate is sequential.
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v: Vec<usize> = (0..1000).collect();
        let out = map_ordered(&v, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, &x)| x == 2 * i));
        let out = map_range(17, |i| i + 1);
        assert_eq!(out, (1..18).collect::<Vec<_>>());
    }
}
