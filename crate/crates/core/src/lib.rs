//! Vector-valued proximal point method for nonconvex multiobjective problems
//! on closed convex sets, with criticality certificates and ground-truth
//! oracles.

pub mod linalg;
pub mod funcspace;
pub mod minnorm;
pub mod qp;
pub mod convexset;
pub mod criticality;
pub mod subsolver;
pub mod ppa;
pub mod oracle;
pub mod problem;
pub mod bench;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/functions.md")]
    mod functions {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/criticality.md")]
    mod criticality {}
    #[doc = include_str!("../../../book/src/proximal.md")]
    mod proximal {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
