//! Data-parallel map helpers.
//!
//! With the `parallel` feature these run on the rayon thread pool; without it
//! they fall back to plain sequential iteration. Output order always matches
//! input order, and callers derive per-item seeds from the item index, so
//! results are identical either way.

/// Whether the rayon backend is compiled in.
#[inline]
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential reference for [`map_indexed`], always available so the two
/// paths can be compared.
pub fn map_indexed_sequential<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let par = map_indexed(1000, |i| i * i);
        let seq = map_indexed_sequential(1000, |i| i * i);
        assert_eq!(par, seq);
        let items: Vec<u32> = (0..100).collect();
        assert_eq!(map_slice(&items, |x| x + 1), (1..101).collect::<Vec<_>>());
    }
}
