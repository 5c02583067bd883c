//! Dependency-free SVG scatter plots of embeddings.
//!
//! Each eigenvector becomes one labeled marker. The DC vector (index 0) is
//! drawn magenta and the Fiedler vector (index 1) cyan; every other marker is
//! shaded on a gray scale by its eigenvalue, dark for large. Embeddings in
//! three dimensions are flattened through a fixed-angle oblique projection so
//! the output stays a plain 2D document.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::embedding::Embedding;
use crate::spectral::Spectrum;

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("embedding has no points to draw")]
    Empty,
    #[error("cannot render a {n0}-dimensional embedding (at most 3)")]
    UnsupportedDimension { n0: usize },
    #[error("embedding has {points} points but the spectrum has {eigenvalues} eigenvalues")]
    LengthMismatch { points: usize, eigenvalues: usize },
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 48.0;
const MARKER_RADIUS: f64 = 6.0;

/// Renders the scatter document in memory. One marker and one index label
/// per eigenvector; 1D embeddings become a strip along the horizontal axis.
pub fn svg_scatter_document(emb: &Embedding, spectrum: &Spectrum) -> Result<String, SvgError> {
    let pts = emb.points();
    let (n, n0) = (pts.nrows(), pts.ncols());
    if n == 0 {
        return Err(SvgError::Empty);
    }
    if n0 > 3 {
        return Err(SvgError::UnsupportedDimension { n0 });
    }
    if spectrum.len() != n {
        return Err(SvgError::LengthMismatch {
            points: n,
            eigenvalues: spectrum.len(),
        });
    }

    // Flip the vertical axis here so mathematical "up" stays up in SVG's
    // y-down coordinate system.
    let planar: Vec<(f64, f64)> = (0..n)
        .map(|k| match n0 {
            1 => (pts[(k, 0)], 0.0),
            2 => (pts[(k, 0)], -pts[(k, 1)]),
            _ => (
                pts[(k, 0)] + 0.35 * pts[(k, 2)],
                -(pts[(k, 1)] + 0.20 * pts[(k, 2)]),
            ),
        })
        .collect();

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &planar {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    // One shared scale for both axes keeps the aspect ratio; collapsed
    // clouds (a single point, or an all-zero embedding) sit at the center.
    let span = (x_max - x_min).max(y_max - y_min);
    let scale = if span > 0.0 {
        (WIDTH - 2.0 * MARGIN) / span
    } else {
        1.0
    };
    let x_mid = 0.5 * (x_min + x_max);
    let y_mid = 0.5 * (y_min + y_max);
    let place = |(x, y): (f64, f64)| {
        (
            0.5 * WIDTH + (x - x_mid) * scale,
            0.5 * HEIGHT + (y - y_mid) * scale,
        )
    };

    let lambda_min = spectrum.eigenvalue(0);
    let lambda_max = spectrum.eigenvalue(n - 1);
    let shade = |lambda: f64| -> String {
        let t = if lambda_max > lambda_min {
            (lambda - lambda_min) / (lambda_max - lambda_min)
        } else {
            0.5
        };
        let level = (208.0 - 144.0 * t).round() as u8;
        format!("#{level:02x}{level:02x}{level:02x}")
    };

    let mut doc = String::new();
    doc.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    doc.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\">\n"
    ));
    doc.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));
    for (k, &p) in planar.iter().enumerate() {
        let (cx, cy) = place(p);
        let fill = match k {
            0 => "#ff00ff".to_string(),
            1 => "#00ffff".to_string(),
            _ => shade(spectrum.eigenvalue(k)),
        };
        doc.push_str(&format!(
            "  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{MARKER_RADIUS}\" \
             fill=\"{fill}\" stroke=\"#222222\" stroke-width=\"1\"/>\n"
        ));
        doc.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" \
             font-size=\"11\" fill=\"#333333\">{k}</text>\n",
            cx + MARKER_RADIUS + 3.0,
            cy + 4.0,
        ));
    }
    doc.push_str("</svg>\n");
    Ok(doc)
}

/// Renders and writes the scatter document to `path`.
pub fn emit_svg_scatter(emb: &Embedding, spectrum: &Spectrum, path: &Path) -> Result<(), SvgError> {
    let doc = svg_scatter_document(emb, spectrum)?;
    fs::write(path, doc).map_err(|source| SvgError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::classical_mds;
    use crate::graph::{build_grid, build_path};
    use crate::spectral::{eigendecompose, laplacian, LaplacianKind};
    use nalgebra::DMatrix;

    fn spectrum_of(g: &crate::graph::Graph) -> Spectrum {
        let l = laplacian(g, LaplacianKind::Unnormalized);
        eigendecompose(l.as_view(), LaplacianKind::Unnormalized).unwrap()
    }

    fn distances_from_coords(coords: &[(f64, f64, f64)]) -> DMatrix<f64> {
        let n = coords.len();
        DMatrix::from_fn(n, n, |i, j| {
            let (dx, dy, dz) = (
                coords[i].0 - coords[j].0,
                coords[i].1 - coords[j].1,
                coords[i].2 - coords[j].2,
            );
            (dx * dx + dy * dy + dz * dz).sqrt()
        })
    }

    #[test]
    fn grid_document_has_one_marker_and_label_per_eigenvector() {
        let g = build_grid(2, 2).unwrap();
        let s = spectrum_of(&g);
        let d = distances_from_coords(&[
            (0.0, 0.0, 0.0),
            (1.0, 0.0, 0.0),
            (0.0, 1.0, 0.0),
            (1.0, 1.0, 0.0),
        ]);
        let doc = svg_scatter_document(&classical_mds(&d, 2).unwrap(), &s).unwrap();
        assert_eq!(doc.matches("<circle").count(), 4);
        assert_eq!(doc.matches("<text").count(), 4);
        assert_eq!(doc.matches("#ff00ff").count(), 1);
        assert_eq!(doc.matches("#00ffff").count(), 1);
        assert!(doc.starts_with("<?xml"));
        assert!(doc.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn one_dimensional_embeddings_render_as_a_strip() {
        let g = build_path(3).unwrap();
        let s = spectrum_of(&g);
        let d = distances_from_coords(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)]);
        let doc = svg_scatter_document(&classical_mds(&d, 1).unwrap(), &s).unwrap();
        assert_eq!(doc.matches("<circle").count(), 3);
        // All markers share the vertical midline in a strip plot.
        assert_eq!(doc.matches("cy=\"320.00\"").count(), 3);
    }

    #[test]
    fn three_dimensional_embeddings_project_without_error() {
        let g = build_grid(2, 2).unwrap();
        let s = spectrum_of(&g);
        let d = distances_from_coords(&[
            (0.0, 0.0, 0.0),
            (1.0, 0.1, 0.4),
            (0.0, 1.0, 0.8),
            (1.0, 1.0, 0.2),
        ]);
        let doc = svg_scatter_document(&classical_mds(&d, 3).unwrap(), &s).unwrap();
        assert_eq!(doc.matches("<circle").count(), 4);
    }

    #[test]
    fn dimensions_above_three_are_rejected() {
        let g = build_path(5).unwrap();
        let s = spectrum_of(&g);
        // A 4-simplex-ish cloud in R^4 via five unit-distance-ish points.
        let n = 5;
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        let emb = classical_mds(&d, 4).unwrap();
        assert!(matches!(
            svg_scatter_document(&emb, &s),
            Err(SvgError::UnsupportedDimension { n0: 4 })
        ));
    }

    #[test]
    fn spectrum_and_embedding_lengths_must_agree() {
        let g = build_path(3).unwrap();
        let s = spectrum_of(&g);
        let d = distances_from_coords(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]);
        let emb = classical_mds(&d, 1).unwrap();
        assert!(matches!(
            svg_scatter_document(&emb, &s),
            Err(SvgError::LengthMismatch {
                points: 2,
                eigenvalues: 3
            })
        ));
    }

    #[test]
    fn collapsed_embeddings_still_render() {
        let g = build_path(2).unwrap();
        let s = spectrum_of(&g);
        let emb = classical_mds(&DMatrix::zeros(2, 2), 1).unwrap();
        let doc = svg_scatter_document(&emb, &s).unwrap();
        assert_eq!(doc.matches("<circle").count(), 2);
        assert_eq!(doc.matches("cx=\"320.00\"").count(), 2);
    }

    #[test]
    fn emit_writes_the_document_to_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("embedding.svg");
        let g = build_path(3).unwrap();
        let s = spectrum_of(&g);
        let d = distances_from_coords(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (2.0, 0.0, 0.0)]);
        emit_svg_scatter(&classical_mds(&d, 1).unwrap(), &s, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("</svg>"));
    }
}
