//! Data-parallel execution of independent runs.
//!
//! Year-pair decompositions and batch verification runs are independent
//! pure functions, so they map cleanly onto rayon. With the `parallel`
//! feature disabled everything degrades to plain sequential iteration.
//! Results are collected in input order either way, so parallel and
//! sequential execution produce identical output.

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Always-sequential variant, kept callable for benchmarks comparing the
/// two paths and for callers that must avoid thread spawn overhead.
pub fn map_ordered_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}
