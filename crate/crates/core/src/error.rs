use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node type id {0}")]
    UnknownNodeTypeId(u32),
    #[error("unknown edge type id {0}")]
    UnknownEdgeTypeId(u32),
    #[error("unknown node type `{0}`")]
    UnknownNodeType(String),
    #[error("unknown edge type `{0}`")]
    UnknownEdgeType(String),
    #[error("duplicate type name `{0}`")]
    DuplicateTypeName(String),
    #[error("node {node} does not exist (graph has {count} nodes)")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("cannot identify a node of type `{0}` with a node of type `{1}`")]
    TypeConflict(String, String),
    #[error("graphs have different type universes")]
    SchemaMismatch,
    #[error("malformed graph file: {0}")]
    MalformedGraph(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("class expression is not in normalized form: {0}")]
    NotNormalized(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model/graph type universe mismatch: {0}")]
    TypeUniverse(String),
    #[error("model shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("empty {0} set")]
    EmptySet(&'static str),
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
