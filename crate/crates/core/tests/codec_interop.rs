//! Interoperability with independent JPEG implementations: libjpeg-written
//! files (plus libjpeg's own decodes of them) and the zune-jpeg decoder.

use std::io::Cursor;
use std::path::PathBuf;

use dctx_core::blockdct::{compress, decoded_samples, decompress, dequantized_plane, qf_to_qm};
use dctx_core::jfif::{encode_jpeg, parse_jpeg, JfifError};
use dctx_core::{pnm, ColorSpace, ComponentKind, PixelImage, Subsampling};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/images").join(rel)
}

fn max_abs_diff(a: &PixelImage, b: &PixelImage) -> f64 {
    a.planes
        .iter()
        .zip(&b.planes)
        .flat_map(|(p, q)| p.data.iter().zip(&q.data).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn mean_abs_diff(a: &PixelImage, b: &PixelImage) -> f64 {
    let mut s = 0.0;
    let mut n = 0.0;
    for (p, q) in a.planes.iter().zip(&b.planes) {
        for (x, y) in p.data.iter().zip(&q.data) {
            s += (x - y).abs();
            n += 1.0;
        }
    }
    s / n
}

#[test]
fn libjpeg_files_parse_and_reencode_identically() {
    for name in [
        "libjpeg_q75_420.jpg",
        "libjpeg_q50_444.jpg",
        "libjpeg_q30_opt.jpg",
        "libjpeg_q60_restart.jpg",
        "libjpeg_gray_q40.jpg",
    ] {
        let bytes = std::fs::read(data(name)).unwrap();
        let q = parse_jpeg(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(q.validate(), Ok(()), "{name}");
        assert_eq!(q.pixel_dims, (61, 75));
        let again = parse_jpeg(&encode_jpeg(&q).unwrap()).unwrap();
        assert_eq!(again, q, "{name}");
    }
}

#[test]
fn libjpeg_tables_follow_ijg_scaling() {
    for (name, qf) in [("libjpeg_q75_420.jpg", 75), ("libjpeg_q50_444.jpg", 50), ("libjpeg_gray_q40.jpg", 40)] {
        let q = parse_jpeg(&std::fs::read(data(name)).unwrap()).unwrap();
        assert_eq!(q.quant_tables[0], qf_to_qm(qf, ComponentKind::Luma).unwrap(), "{name}");
        if !q.is_gray() {
            assert_eq!(q.quant_tables[1], qf_to_qm(qf, ComponentKind::Chroma).unwrap(), "{name}");
        }
        assert_eq!(q.quant_tables[0].estimate_qf(), Some(qf));
    }
}

#[test]
fn sampling_descriptors_detected() {
    let q = parse_jpeg(&std::fs::read(data("libjpeg_q75_420.jpg")).unwrap()).unwrap();
    assert_eq!(q.subsampling, Subsampling::S420);
    assert_eq!((q.components[1].coeffs.height, q.components[1].coeffs.width), (32, 40));
    let q = parse_jpeg(&std::fs::read(data("libjpeg_q50_444.jpg")).unwrap()).unwrap();
    assert_eq!(q.subsampling, Subsampling::S444);
    let q = parse_jpeg(&std::fs::read(data("libjpeg_gray_q40.jpg")).unwrap()).unwrap();
    assert!(q.is_gray());
}

#[test]
fn progressive_file_is_rejected() {
    let bytes = std::fs::read(data("libjpeg_progressive.jpg")).unwrap();
    assert!(matches!(parse_jpeg(&bytes), Err(JfifError::UnsupportedProcess(_))));
}

/// Pixel agreement with libjpeg's decode of the same file. libjpeg uses an
/// integer IDCT, so per-sample differences of a couple of levels are normal.
#[test]
fn decode_agrees_with_libjpeg() {
    for (name, decoded) in [
        ("libjpeg_q75_420.jpg", "libjpeg_q75_420.decoded.ppm"),
        ("libjpeg_q50_444.jpg", "libjpeg_q50_444.decoded.ppm"),
        ("libjpeg_q30_opt.jpg", "libjpeg_q30_opt.decoded.ppm"),
        ("libjpeg_q60_restart.jpg", "libjpeg_q60_restart.decoded.ppm"),
        ("libjpeg_gray_q40.jpg", "libjpeg_gray_q40.decoded.pgm"),
    ] {
        let ours = decompress(&parse_jpeg(&std::fs::read(data(name)).unwrap()).unwrap());
        let theirs = pnm::read(data(decoded)).unwrap();
        let max = max_abs_diff(&ours, &theirs);
        let mean = mean_abs_diff(&ours, &theirs);
        eprintln!("libjpeg {name}: max {max} mean {mean:.4}");
        assert!(max <= 3.0 && mean < 0.5, "{name}: max {max} mean {mean}");
    }
}

fn zune_decode(bytes: &[u8], gray: bool) -> Vec<u8> {
    use zune_jpeg::zune_core::{colorspace::ColorSpace as Zcs, options::DecoderOptions};
    let out = if gray { Zcs::Luma } else { Zcs::RGB };
    let options = DecoderOptions::default().jpeg_set_out_colorspace(out);
    let mut dec = zune_jpeg::JpegDecoder::new_with_options(Cursor::new(bytes), options);
    dec.decode().unwrap()
}

#[test]
fn zune_decodes_our_streams() {
    let rgb = pnm::read(asset("train/chelsea.ppm")).unwrap().crop(77, 93);
    let gray = pnm::read(asset("gray/camera.pgm")).unwrap();
    // zune's chroma upsampler is not the triangle filter, hence the looser
    // 4:2:0 bounds
    for (img, sub, qf, tol, mean_tol) in [
        (&rgb, Subsampling::S444, 90, 2.0, 0.5),
        (&rgb, Subsampling::S444, 20, 2.0, 0.5),
        (&rgb, Subsampling::S420, 50, 6.0, 1.0),
        (&gray, Subsampling::S444, 10, 1.0, 0.05),
    ] {
        let q = compress(img, qf, sub).unwrap();
        let ours = decompress(&q);
        let pixels = zune_decode(&encode_jpeg(&q).unwrap(), q.is_gray());
        let theirs = PixelImage::from_interleaved_u8(img.height(), img.width(), img.colorspace, &pixels);
        let max = max_abs_diff(&ours, &theirs);
        let mean = mean_abs_diff(&ours, &theirs);
        eprintln!("zune {sub} qf {qf}: max {max} mean {mean:.4}");
        assert!(max <= tol && mean < mean_tol, "{sub} qf {qf}: max {max} mean {mean}");
    }
}

/// Component samples before colour conversion agree to one level; the RGB
/// differences above come from rounding at different stages.
#[test]
fn zune_component_samples_within_one_level() {
    use zune_jpeg::zune_core::{colorspace::ColorSpace as Zcs, options::DecoderOptions};
    let img = pnm::read(asset("train/coffee.ppm")).unwrap().crop(61, 83);
    for qf in [10, 50, 95] {
        let q = compress(&img, qf, Subsampling::S444).unwrap();
        let options = DecoderOptions::default().jpeg_set_out_colorspace(Zcs::YCbCr);
        let bytes = encode_jpeg(&q).unwrap();
        let theirs = zune_jpeg::JpegDecoder::new_with_options(Cursor::new(&bytes[..]), options).decode().unwrap();
        for (c, comp) in q.components.iter().enumerate() {
            let ours = decoded_samples(&dequantized_plane(&comp.coeffs, q.qm(c)));
            for r in 0..img.height() {
                for col in 0..img.width() {
                    let t = theirs[(r * img.width() + col) * 3 + c] as f64;
                    assert!((ours.get(r, col) - t).abs() <= 1.0, "qf {qf} c {c} ({r},{col})");
                }
            }
        }
    }
}

#[test]
fn gray_fixture_is_gray() {
    assert_eq!(pnm::read(asset("gray/camera.pgm")).unwrap().colorspace, ColorSpace::Gray);
}
