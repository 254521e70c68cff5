//! Link prediction in weighted networks.
//!
//! The crate loads undirected weighted graphs from edge-list or Pajek files,
//! scores unlinked node pairs with ten similarity indices (CN, AA, LP, PE and
//! their weighted versions WCN, WAA, WLP, WPE), and evaluates predictions
//! with AUC and Precision@L over repeated random train/probe splits.
//!
//! The centerpiece is the weighted path entropy (WPE) index: the likelihood
//! of a link is expressed as the self-information of the link event under a
//! degree-uncorrelated null model, reduced by the information carried by the
//! simple paths already connecting the pair, each path weighted by its total
//! link weight raised to a tunable exponent. See [`entropy`] and [`indices`]
//! for the formulas.
//!
//! ```
//! use linkpred::graph::WeightedGraph;
//! use linkpred::indices::{score_all_pairs, IndexFamily, IndexSpec};
//!
//! let g = WeightedGraph::from_links(
//!     (0..4).map(|i| i.to_string()).collect(),
//!     &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 2.0)],
//! )
//! .unwrap();
//! let spec = IndexSpec::new(IndexFamily::Wpe).with_alpha(0.5);
//! let table = score_all_pairs(&g, &spec).unwrap();
//! assert_eq!(table.len(), 2); // the two diagonals of the 4-cycle
//! ```

pub mod entropy;
pub mod error;
pub mod eval;
pub mod graph;
pub mod indices;
pub mod io;
pub mod paths;

pub use error::{Error, Result};
pub use graph::{GraphStats, NodeId, WeightedGraph};
pub use indices::{IndexFamily, IndexSpec, ScoreTable};
