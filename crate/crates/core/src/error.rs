use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("cannot parse `{text}` as a value of type `{type_name}`")]
    Parse { type_name: String, text: String },
    #[error("type `{0}` has no finite enumeration")]
    NotEnumerable(String),
    #[error("expected {expected} values, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("value at position {position} is not a member of `{type_name}`")]
    TypeMismatch { position: usize, type_name: String },
    #[error("invalid type specification: {0}")]
    InvalidTypeSpec(String),
    #[error("invalid simple schema: {0}")]
    InvalidSimpleSchema(String),
    #[error("morphisms do not compose: {0}")]
    Composition(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("pushout order conflict: {0}")]
    OrderConflict(String),
    #[error("schema morphism points the wrong way: {0}")]
    Direction(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("unsupported colimit: {0}")]
    UnsupportedColimit(String),
    #[error("label conflict: {0}")]
    LabelConflict(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("unknown simplex `{0}`")]
    UnknownSimplex(String),
    #[error("not face-closed: {0}")]
    NotFaceClosed(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("schema morphism is not monic")]
    NotMonic,
    #[error("result is not finite: {0}")]
    NonFiniteResult(String),
    #[error("initial database is not materializable: {0}")]
    InitialNotMaterializable(String),
    #[error("invalid database: {0}")]
    InvalidDatabase(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
