//! Blaschke model of a Siegel quadratic: the map, its drops and rays,
//! puzzle pieces, and Julia-set rasters.

pub mod blaschke;
pub mod curves;

pub use blaschke::{solve_tau, BlaschkeMap};
pub use curves::{piece_zero, CurveConfig, DropRegion, PieceZero};
pub mod puzzle;

pub use puzzle::{build_puzzle, Puzzle, PuzzleConfig, PuzzlePiece};
pub mod raster;

pub use raster::{density_probe, remeasure, render, render_quadratic, symmetry_audit, JuliaRaster, PixelClass, RasterSpec};
