//! Dense index newtypes used by the solver-facing data structures.
//!
//! Identifiers in documents are strings; once an [`Instance`](crate::formulation::Instance)
//! is built every node, model, functionality and request gets a compact index
//! so that variable spaces with millions of entries stay small.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn new(i: usize) -> Self {
                Self(u32::try_from(i).expect("index overflows u32"))
            }

            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_type!(
    /// Position of a node inside a [`Topology`](crate::netmodel::Topology).
    NodeIx
);
index_type!(
    /// Position of a model inside a [`Catalog`](crate::catalog::Catalog).
    ModelIx
);
index_type!(
    /// Position of a functionality inside the catalog's functionality universe.
    FuncIx
);
index_type!(
    /// Position of a request inside a [`RequestSet`](crate::requests::RequestSet).
    RequestIx
);
