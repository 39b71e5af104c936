//! Rectilinear tile self-assembly: colored Wang tiles, deterministic
//! assembly, the SAT-to-pattern reduction with its witness tile sets, the
//! three-color supertile blowup, and exact small-scale solvers.

pub mod assembly;
pub mod format;
pub mod iso;
pub mod model;
pub mod pattern;
pub mod sat;
pub mod satreduce;
pub mod solver;
pub mod superreduce;

pub use assembly::{
    assemble, cell_tileset, pattern_of, verify_stream, verify_stream_parallel, AssemblyError,
    Assignment, VerifyError,
};
pub use iso::{glue_isomorphic, rename_glues};
pub use model::{Color, HGlue, Namespace, Seed, TileSet, TileType, VGlue};
pub use pattern::{color_census, Census, DensePattern, Pattern};
