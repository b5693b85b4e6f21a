//! Switch between sequential and rayon iteration without duplicating loops.
//!
//! Every parallel site collects through an indexed iterator, so ordering of the
//! results never depends on scheduling.

#[cfg(feature = "parallel")]
macro_rules! par_map_collect {
    ($range:expr, $f:expr) => {{
        use rayon::prelude::*;
        ($range).into_par_iter().map($f).collect()
    }};
}

#[cfg(not(feature = "parallel"))]
macro_rules! par_map_collect {
    ($range:expr, $f:expr) => {{
        ($range).into_iter().map($f).collect()
    }};
}

pub(crate) use par_map_collect;
