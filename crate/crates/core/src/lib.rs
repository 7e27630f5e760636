pub mod cpdriver;
pub mod error;
pub mod flowsep;
pub mod gen;
pub mod instance;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod probbound;
pub mod reformulation;
pub mod robust01;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/bands.md")]
    mod bands {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/separation.md")]
    mod separation {}
    #[doc = include_str!("../../../book/src/counterpart.md")]
    mod counterpart {}
    #[doc = include_str!("../../../book/src/binary.md")]
    mod binary {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
