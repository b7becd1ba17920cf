use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Encodings, UserId};

/// Undirected friendship graph over encoded users.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SocialGraph {
    friends: Vec<BTreeSet<UserId>>,
}

impl SocialGraph {
    pub fn empty(num_users: usize) -> Self {
        SocialGraph {
            friends: vec![BTreeSet::new(); num_users],
        }
    }

    /// Symmetrise the edges, dropping self loops and unknown users.
    pub fn from_edges<I: IntoIterator<Item = (UserId, UserId)>>(num_users: usize, edges: I) -> Self {
        let mut g = SocialGraph::empty(num_users);
        for (a, b) in edges {
            if a == b || a.index() >= num_users || b.index() >= num_users {
                continue;
            }
            g.friends[a.index()].insert(b);
            g.friends[b.index()].insert(a);
        }
        g
    }

    pub fn from_named_edges(enc: &Encodings, edges: &[(String, String)]) -> Self {
        let encoded = edges
            .iter()
            .filter_map(|(a, b)| Some((enc.user(a)?, enc.user(b)?)));
        SocialGraph::from_edges(enc.num_users(), encoded)
    }

    pub fn num_users(&self) -> usize {
        self.friends.len()
    }

    pub fn friends(&self, u: UserId) -> &BTreeSet<UserId> {
        static EMPTY: BTreeSet<UserId> = BTreeSet::new();
        self.friends.get(u.index()).unwrap_or(&EMPTY)
    }

    pub fn num_edges(&self) -> usize {
        self.friends.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Keep only the users listed in `keep` (old ids), renumbered by position.
    pub fn remap(&self, keep: &[UserId]) -> SocialGraph {
        let mut new_of = vec![None; self.friends.len()];
        for (new, old) in keep.iter().enumerate() {
            new_of[old.index()] = Some(UserId::from(new));
        }
        let edges = keep.iter().flat_map(|&old| {
            let new_of = &new_of;
            self.friends(old)
                .iter()
                .filter_map(move |f| Some((new_of[old.index()]?, new_of[f.index()]?)))
        });
        SocialGraph::from_edges(keep.len(), edges.collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_without_self_loops() {
        let g = SocialGraph::from_edges(3, vec![(UserId(0), UserId(1)), (UserId(2), UserId(2)), (UserId(1), UserId(0))]);
        assert!(g.friends(UserId(1)).contains(&UserId(0)));
        assert!(g.friends(UserId(0)).contains(&UserId(1)));
        assert!(g.friends(UserId(2)).is_empty());
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn remap_keeps_surviving_edges() {
        let g = SocialGraph::from_edges(3, vec![(UserId(0), UserId(2)), (UserId(0), UserId(1))]);
        let r = g.remap(&[UserId(0), UserId(2)]);
        assert_eq!(r.num_users(), 2);
        assert!(r.friends(UserId(1)).contains(&UserId(0)));
        assert_eq!(r.num_edges(), 1);
    }
}
