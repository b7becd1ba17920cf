//! Non-neural comparators: popularity, Markov chains, Apriori trips and HITS.

mod apriori;
mod hits;
mod markov;
mod popularity;

pub use apriori::{apriori_generate, trip_order, AprioriConfig, Trip};
pub use hits::{leader_clusters, power_iteration, Hits, HitsConfig, Region};
pub use markov::{Markov, MarkovChain};
pub use popularity::{Pick, Popularity};
