//! Annotated renderings of a run: instance boxes per pattern, fitted lines
//! and the vanishing point.

use std::fmt::Write;

use image::{Rgb, RgbImage};
use imageproc::drawing::{draw_cross_mut, draw_hollow_circle_mut, draw_hollow_rect_mut, draw_line_segment_mut};
use imageproc::rect::Rect;

use crate::types::{LineEstimate, RecurringPattern};

/// One colour per pattern, cycled.
pub const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
];

const LINE_COLOR: [u8; 3] = [255, 225, 25];
const VP_COLOR: [u8; 3] = [255, 0, 0];
const ARROW_MARGIN: f64 = 12.0;
const ARROW_HEAD: f64 = 14.0;

pub fn pattern_color(index: usize) -> [u8; 3] {
    PALETTE[index % PALETTE.len()]
}

/// What to draw over the base image.
#[derive(Clone, Copy, Debug)]
pub struct Annotations<'a> {
    pub patterns: &'a [RecurringPattern],
    pub lines: &'a [LineEstimate],
    pub vanishing_point: Option<[f64; 2]>,
}

/// The part of the line `a·x + b·y + c = 0` inside `[0, w] × [0, h]`.
pub fn clip_line(line: &LineEstimate, width: f64, height: f64) -> Option<([f64; 2], [f64; 2])> {
    let (a, b, c) = (line.a, line.b, line.c);
    let mut hits: Vec<[f64; 2]> = Vec::with_capacity(4);
    if b.abs() > 1e-12 {
        for x in [0.0, width] {
            let y = -(a * x + c) / b;
            if (0.0..=height).contains(&y) {
                hits.push([x, y]);
            }
        }
    }
    if a.abs() > 1e-12 {
        for y in [0.0, height] {
            let x = -(b * y + c) / a;
            if (0.0..=width).contains(&x) {
                hits.push([x, y]);
            }
        }
    }
    let d = line.direction();
    let t = |p: &[f64; 2]| p[0] * d[0] + p[1] * d[1];
    let lo = hits.iter().copied().min_by(|p, q| t(p).total_cmp(&t(q)))?;
    let hi = hits.iter().copied().max_by(|p, q| t(p).total_cmp(&t(q)))?;
    Some((lo, hi))
}

/// Where the ray from the image centre toward `target` leaves the frame,
/// pulled in by `margin`.
pub fn frame_exit(target: [f64; 2], width: f64, height: f64, margin: f64) -> Option<[f64; 2]> {
    let c = [width / 2.0, height / 2.0];
    let d = [target[0] - c[0], target[1] - c[1]];
    let len = d[0].hypot(d[1]);
    if len < 1e-12 {
        return None;
    }
    let (hx, hy) = (c[0] - margin, c[1] - margin);
    let tx = if d[0].abs() > 1e-12 { hx / d[0].abs() } else { f64::INFINITY };
    let ty = if d[1].abs() > 1e-12 { hy / d[1].abs() } else { f64::INFINITY };
    let t = tx.min(ty);
    Some([c[0] + d[0] * t, c[1] + d[1] * t])
}

fn inside(p: [f64; 2], width: f64, height: f64) -> bool {
    p[0] >= 0.0 && p[0] < width && p[1] >= 0.0 && p[1] < height
}

/// Arrow shaft and head segments pointing at an off-frame point.
fn arrow_segments(target: [f64; 2], width: f64, height: f64) -> Vec<([f64; 2], [f64; 2])> {
    let Some(tip) = frame_exit(target, width, height, ARROW_MARGIN) else {
        return Vec::new();
    };
    let c = [width / 2.0, height / 2.0];
    let d = [tip[0] - c[0], tip[1] - c[1]];
    let len = d[0].hypot(d[1]).max(1e-12);
    let u = [d[0] / len, d[1] / len];
    let shaft = (len * 0.35).max(ARROW_HEAD * 2.0).min(len);
    let tail = [tip[0] - u[0] * shaft, tip[1] - u[1] * shaft];
    let back = [tip[0] - u[0] * ARROW_HEAD, tip[1] - u[1] * ARROW_HEAD];
    let n = [-u[1] * ARROW_HEAD * 0.5, u[0] * ARROW_HEAD * 0.5];
    vec![
        (tail, tip),
        ([back[0] + n[0], back[1] + n[1]], tip),
        ([back[0] - n[0], back[1] - n[1]], tip),
    ]
}

fn segment(img: &mut RgbImage, a: [f64; 2], b: [f64; 2], color: [u8; 3]) {
    draw_line_segment_mut(img, (a[0] as f32, a[1] as f32), (b[0] as f32, b[1] as f32), Rgb(color));
}

/// Draws the annotations onto a copy of `base`.
pub fn render_overlay(base: &RgbImage, ann: &Annotations) -> RgbImage {
    let mut img = base.clone();
    let (w, h) = (img.width() as f64, img.height() as f64);
    for line in ann.lines {
        if let Some((a, b)) = clip_line(line, w - 1.0, h - 1.0) {
            segment(&mut img, a, b, LINE_COLOR);
        }
    }
    for (k, rp) in ann.patterns.iter().enumerate() {
        let color = Rgb(pattern_color(k));
        for inst in &rp.instances {
            let b = inst.bbox;
            for inset in 0..2 {
                let x = b.x_min.round() as i32 + inset;
                let y = b.y_min.round() as i32 + inset;
                let bw = (b.width().round() as i32 - 2 * inset).max(1) as u32;
                let bh = (b.height().round() as i32 - 2 * inset).max(1) as u32;
                draw_hollow_rect_mut(&mut img, Rect::at(x, y).of_size(bw, bh), color);
            }
        }
    }
    if let Some(vp) = ann.vanishing_point {
        if inside(vp, w, h) {
            let (x, y) = (vp[0].round() as i32, vp[1].round() as i32);
            draw_cross_mut(&mut img, Rgb(VP_COLOR), x, y);
            draw_hollow_circle_mut(&mut img, (x, y), 6, Rgb(VP_COLOR));
        } else {
            for (a, b) in arrow_segments(vp, w, h) {
                segment(&mut img, a, b, VP_COLOR);
            }
        }
    }
    img
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// The same annotations as an SVG document, with the raster referenced by
/// `background` when given.
pub fn render_svg(width: u32, height: u32, background: Option<&str>, ann: &Annotations) -> String {
    let (w, h) = (width as f64, height as f64);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    if let Some(href) = background {
        let _ = writeln!(s, r#"  <image xlink:href="{href}" x="0" y="0" width="{width}" height="{height}"/>"#);
    }
    for line in ann.lines {
        if let Some((a, b)) = clip_line(line, w, h) {
            let _ = writeln!(
                s,
                r#"  <line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1"/>"#,
                a[0],
                a[1],
                b[0],
                b[1],
                hex(LINE_COLOR)
            );
        }
    }
    for (k, rp) in ann.patterns.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"  <g class="pattern" data-index="{k}" stroke="{}" fill="none" stroke-width="2">"#,
            hex(pattern_color(k))
        );
        for inst in &rp.instances {
            let b = inst.bbox;
            let _ = writeln!(
                s,
                r#"    <rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                b.x_min,
                b.y_min,
                b.width(),
                b.height()
            );
        }
        s.push_str("  </g>\n");
    }
    if let Some(vp) = ann.vanishing_point {
        let color = hex(VP_COLOR);
        if inside(vp, w, h) {
            let _ = writeln!(
                s,
                r#"  <circle class="vp" cx="{:.2}" cy="{:.2}" r="6" stroke="{color}" fill="none" stroke-width="2"/>"#,
                vp[0], vp[1]
            );
        } else {
            for (a, b) in arrow_segments(vp, w, h) {
                let _ = writeln!(
                    s,
                    r#"  <line class="vp-arrow" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                    a[0], a[1], b[0], b[1]
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
