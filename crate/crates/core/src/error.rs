use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {index} has non-positive depth z = {z}")]
    NonPositiveDepth { index: usize, z: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid joint regressor: {0}")]
    InvalidRegressor(String),

    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("vertex {0} is non-manifold (its 1-ring is not a single fan)")]
    NonManifoldVertex(usize),

    #[error("vertex index {index} out of range for {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },

    #[error("ISM branch widths do not add up: o0 has {o0} channels, o1+o2+o3 have {concat}")]
    BranchChannelMismatch { o0: usize, concat: usize },

    #[error("heatmap resolution mismatch: {0:?} vs {1:?}")]
    ResolutionMismatch((usize, usize), (usize, usize)),

    #[error("group '{group}' references joint {index} but only {count} joints exist")]
    InvalidGroupIndex { group: String, index: usize, count: usize },

    #[error("invalid grouping scheme: {0}")]
    InvalidGrouping(String),

    #[error("silhouette mask has no foreground pixels")]
    EmptyMask,

    #[error("contour has {0} points, need at least 3")]
    DegenerateContour(usize),

    #[error("axis count must be at least 2, got {0}")]
    InvalidAxisCount(usize),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("empty input")]
    EmptyInput,

    #[error("solver iterate moved behind the camera")]
    DivergedBehindCamera,

    #[error("zero-length edge ({0}, {1})")]
    ZeroLengthEdge(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("delta1 ({delta1}) must be greater than delta2 ({delta2}) and delta2 positive")]
    DeltaOrder { delta1: f64, delta2: f64 },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("silhouette mask not found: {0}")]
    MaskNotFound(PathBuf),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    /// Stable machine-readable code, used by the command line error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveDepth { .. } => "geometry.non_positive_depth",
            Error::DimensionMismatch(_) => "geometry.dimension_mismatch",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::DegenerateConfiguration(_) => "geometry.degenerate_configuration",
            Error::InvalidMesh(_) => "mesh.invalid",
            Error::InvalidRegressor(_) => "regressor.invalid",
            Error::InvalidIntrinsics(_) => "intrinsics.invalid",
            Error::NonManifoldVertex(_) => "spiral.non_manifold_vertex",
            Error::VertexOutOfRange { .. } => "spiral.vertex_out_of_range",
            Error::BranchChannelMismatch { .. } => "spiral.branch_channel_mismatch",
            Error::ResolutionMismatch(..) => "cues.resolution_mismatch",
            Error::InvalidGroupIndex { .. } => "cues.invalid_group_index",
            Error::InvalidGrouping(_) => "cues.invalid_grouping",
            Error::EmptyMask => "silhouette.empty_mask",
            Error::DegenerateContour(_) => "silhouette.degenerate_contour",
            Error::InvalidAxisCount(_) => "silhouette.invalid_axis_count",
            Error::EmptyPointSet => "silhouette.empty_point_set",
            Error::EmptyInput => "metrics.empty_input",
            Error::DivergedBehindCamera => "solver.diverged_behind_camera",
            Error::ZeroLengthEdge(..) => "losses.zero_length_edge",
            Error::Config(_) => "config.invalid",
            Error::DeltaOrder { .. } => "config.delta_order",
            Error::Parse { .. } => "io.parse",
            Error::Io { .. } => "io.error",
            Error::MaskNotFound(_) => "io.mask_not_found",
            Error::Json(_) => "io.json",
            Error::Image(_) => "io.image",
        }
    }

    /// Command line exit status: 2 for input and configuration problems,
    /// 3 for everything raised while computing.
    pub fn exit_code(&self) -> i32 {
        let c = self.code();
        if c.starts_with("io.") || c.starts_with("config.") {
            2
        } else {
            3
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
