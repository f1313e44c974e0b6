//! Sequential or data-parallel execution of independent tasks.
//!
//! Results always come back in task order, so anything reduced from them
//! is identical whichever mode ran it.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Execution {
    /// `f(0), f(1), ..., f(n-1)`.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    pub fn map_slice<A, T, F>(self, items: &[A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&A) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    pub fn try_map_slice<A, T, E, F>(self, items: &[A], f: F) -> Result<Vec<T>, E>
    where
        A: Sync,
        T: Send,
        E: Send,
        F: Fn(&A) -> Result<T, E> + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = Execution::Sequential.map_range(1000, |i| i * i);
        let def = Execution::default().map_range(1000, |i| i * i);
        assert_eq!(seq, def);
        let items: Vec<u32> = (0..100).collect();
        let r: Result<Vec<u32>, String> =
            Execution::default().try_map_slice(&items, |&x| if x < 200 { Ok(x + 1) } else { Err("no".into()) });
        assert_eq!(r.unwrap()[99], 100);
    }
}
