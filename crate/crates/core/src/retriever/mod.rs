//! Hop-bounded path retrieval between anchors and joint subgraph assembly.

mod joint;
mod path;
mod subgraph;

pub use joint::{
    build_joint_graph, check_reserved_relations, ContextEvent, JointEdge, JointNode, JointNodeId,
    JointSubgraph, CONTEXT_RELATION, GROUNDING_RELATION,
};
pub use path::{shortest_path, PathResult, DEFAULT_MAX_HOPS};
pub use subgraph::{anchor_pairs, retrieve_subgraph, KgSubgraph};
