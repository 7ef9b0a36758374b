//! Enriches base captions with a pattern count and geometry clauses.

use rescu::captioner::{enhance_caption, CaptionContext, VpStatus};

fn main() -> rescu::Result<()> {
    let cases = [
        ("A group of babies sitting on the couch.", 6, false, VpStatus::None),
        ("An old picture of stone statues on a wall.", 6, false, VpStatus::None),
        ("A group of men jumping in the sky.", 5, true, VpStatus::Outside),
        ("A row of houses along a street.", 4, false, VpStatus::Inside),
    ];
    for (base, n, ts, vp) in cases {
        let ctx = CaptionContext {
            base_caption: base.into(),
            rp_count: n,
            ts_detected: ts,
            vp_status: vp,
            noun_regions: None,
        };
        println!("{base}\n  -> {}", enhance_caption(&ctx)?);
    }
    Ok(())
}
