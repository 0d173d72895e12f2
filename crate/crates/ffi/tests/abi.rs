use std::ffi::CStr;
use std::ptr;

use foalkit_ffi::*;

fn image(h: usize, w: usize, ch: usize, f: impl Fn(usize) -> f64) -> *mut FkImage {
    let data: Vec<f64> = (0..h * w * ch).map(f).collect();
    let mut img = ptr::null_mut();
    assert_eq!(unsafe { fk_image_new(h, w, ch, data.as_ptr(), &mut img) }, FkStatus::Ok);
    img
}

fn labels(h: usize, w: usize, f: impl Fn(usize, usize) -> u8) -> *mut FkLabels {
    let ids: Vec<u8> = (0..h * w).map(|i| f(i / w, i % w)).collect();
    let mut l = ptr::null_mut();
    assert_eq!(unsafe { fk_labels_new(h, w, ids.as_ptr(), &mut l) }, FkStatus::Ok);
    l
}

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { fk_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(fk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn image_round_trips_through_handle() {
    let img = image(2, 4, 3, |i| i as f64 / 24.0);
    let (mut h, mut w, mut c) = (0, 0, 0);
    unsafe {
        assert_eq!(fk_image_shape(img, &mut h, &mut w, &mut c), FkStatus::Ok);
        assert_eq!((h, w, c), (2, 4, 3));
        let mut buf = vec![0.0; 24];
        assert_eq!(fk_image_copy(img, buf.as_mut_ptr(), buf.len()), FkStatus::Ok);
        assert_eq!(buf[23], 23.0 / 24.0);
        assert_eq!(fk_image_copy(img, buf.as_mut_ptr(), 10), FkStatus::InvalidArgument);
        fk_image_free(img);
    }
}

#[test]
fn ssim_of_identical_images_is_one() {
    let a = image(12, 12, 1, |i| (i % 7) as f64 / 7.0);
    let mut v = 0.0;
    unsafe {
        assert_eq!(fk_ssim(a, a, &mut v), FkStatus::Ok);
        fk_image_free(a);
    }
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn shape_mismatch_sets_status_and_message() {
    let a = image(4, 4, 1, |_| 0.5);
    let b = image(5, 4, 1, |_| 0.5);
    let mut v = 0.0;
    unsafe {
        assert_eq!(fk_ssim(a, b, &mut v), FkStatus::ShapeMismatch);
        fk_image_free(a);
        fk_image_free(b);
    }
    assert!(last_error().contains("4x4"), "{}", last_error());
}

#[test]
fn null_pointers_are_reported() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fk_ssim(ptr::null(), ptr::null(), &mut v), FkStatus::NullPointer);
        assert_eq!(fk_image_new(2, 2, 1, ptr::null(), ptr::null_mut()), FkStatus::NullPointer);
        fk_image_free(ptr::null_mut());
    }
    assert!(last_error().starts_with("null pointer"));
}

#[test]
fn invalid_pixel_values_are_rejected() {
    let data = [0.0, 2.0, 0.5, 0.5];
    let mut img = ptr::null_mut();
    assert_eq!(unsafe { fk_image_new(2, 2, 1, data.as_ptr(), &mut img) }, FkStatus::InvalidArgument);
    assert!(img.is_null());
}

#[test]
fn midf_is_zero_at_truth_and_rejects_bad_weight() {
    let a = image(8, 8, 3, |i| (i % 5) as f64 / 5.0);
    let bits = [1u8; 64];
    let mut m = ptr::null_mut();
    let mut v = -1.0;
    unsafe {
        assert_eq!(fk_mask_new(8, 8, bits.as_ptr(), &mut m), FkStatus::Ok);
        assert_eq!(fk_midf(m, a, a, 1.0, &mut v), FkStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(fk_midf(m, a, a, -1.0, &mut v), FkStatus::InvalidArgument);
        fk_mask_free(m);
        fk_image_free(a);
    }
}

#[test]
fn apce_of_flat_translation_depends_on_strictness() {
    let src = image(16, 16, 1, |i| if (i / 16) < 8 { 0.9 } else { 0.1 });
    let flat = image(16, 16, 3, |_| 0.5);
    let (mut lenient, mut strict) = (0.0, 1.0);
    unsafe {
        assert_eq!(fk_apce(flat, src, false, &mut lenient), FkStatus::Ok);
        assert_eq!(fk_apce(flat, src, true, &mut strict), FkStatus::Ok);
        assert_eq!(fk_apce(src, src, false, &mut lenient), FkStatus::Ok);
        fk_image_free(src);
        fk_image_free(flat);
    }
    assert_eq!(lenient, 1.0);
    assert_eq!(strict, 0.0);
}

#[test]
fn class_miou_ignores_void_and_reports_empty_classes() {
    let gt = labels(4, 4, |r, _| if r == 0 { 255 } else { 0 });
    let pred = labels(4, 4, |r, _| if r == 0 { 13 } else { 0 });
    let classes = [0u8, 13];
    let mut v = 0.0;
    unsafe {
        assert_eq!(fk_class_miou(pred, gt, classes.as_ptr(), 2, &mut v), FkStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(fk_class_miou(pred, gt, [13u8].as_ptr(), 1, &mut v), FkStatus::NoValidPixels);
        fk_labels_free(gt);
        fk_labels_free(pred);
    }
}

#[test]
fn oamix_pastes_traffic_light_and_keeps_context() {
    let (h, w) = (16, 16);
    let real = image(h, w, 3, |_| 0.2);
    let fake = image(h, w, 3, |_| 0.8);
    let real_l = labels(h, w, |r, _| if r >= 10 { 0 } else { 10 });
    let fake_l = labels(h, w, |r, c| if (2..8).contains(&r) && (3..6).contains(&c) { 6 } else { 10 });
    let mut mixed = ptr::null_mut();
    let mut pasted = ptr::null_mut();
    let mut ala = 0.0;
    unsafe {
        assert_eq!(fk_oamix(real, fake, real_l, fake_l, FkDomain::A, &mut mixed, &mut pasted, &mut ala), FkStatus::Ok);
        let mut px = vec![0.0; h * w * 3];
        assert_eq!(fk_image_copy(mixed, px.as_mut_ptr(), px.len()), FkStatus::Ok);
        let mut bits = vec![0u8; h * w];
        assert_eq!(fk_mask_copy(pasted, bits.as_mut_ptr(), bits.len()), FkStatus::Ok);
        assert!(bits.contains(&1));
        for (i, &b) in bits.iter().enumerate() {
            let expect = if b == 1 { 0.8 } else { 0.2 };
            assert_eq!(px[i * 3], expect, "pixel {i}");
        }
        assert_eq!(ala, 1.0);
        fk_image_free(mixed);
        fk_mask_free(pasted);
        fk_image_free(real);
        fk_image_free(fake);
        fk_labels_free(real_l);
        fk_labels_free(fake_l);
    }
}

#[test]
fn scheduler_follows_signals_and_is_seeded() {
    let (soc_a, all_a) = ([1u32, 2], [1u32, 2, 3, 4]);
    let (soc_b, all_b) = ([9u32], [7u32, 8, 9]);
    let make = |seed| {
        let mut s = ptr::null_mut();
        let st = unsafe {
            fk_scheduler_new(soc_a.as_ptr(), 2, all_a.as_ptr(), 4, soc_b.as_ptr(), 1, all_b.as_ptr(), 3, seed, &mut s)
        };
        assert_eq!(st, FkStatus::Ok);
        s
    };
    let draw = |s: *mut FkScheduler, d, zs, zg| {
        let (mut id, mut pool) = (0u32, FkPool::All);
        unsafe {
            assert_eq!(fk_scheduler_update(s, d, zs, zg), FkStatus::Ok);
            assert_eq!(fk_scheduler_next(s, d, &mut id, &mut pool), FkStatus::Ok);
        }
        (id, pool)
    };
    let (s1, s2) = (make(5), make(5));
    for k in 0..40 {
        let (zs, zg) = if k % 3 == 0 { (0.9, 0.1) } else { (0.1, 0.9) };
        let d = if k % 2 == 0 { FkDomain::A } else { FkDomain::B };
        let a = draw(s1, d, zs, zg);
        assert_eq!(a, draw(s2, d, zs, zg));
        if zs > zg {
            assert_eq!(a.1, FkPool::Soc);
            assert!(if d == FkDomain::A { soc_a.contains(&a.0) } else { soc_b.contains(&a.0) });
        } else {
            assert_eq!(a.1, FkPool::All);
        }
    }
    unsafe {
        assert_eq!(fk_scheduler_update(s1, FkDomain::A, f64::NAN, 0.0), FkStatus::NegativeLoss);
        fk_scheduler_free(s1);
        fk_scheduler_free(s2);
    }
}

#[test]
fn scheduler_rejects_soc_ids_outside_pool() {
    let mut s = ptr::null_mut();
    let st = unsafe {
        fk_scheduler_new([5u32].as_ptr(), 1, [1u32].as_ptr(), 1, ptr::null(), 0, [2u32].as_ptr(), 1, 0, &mut s)
    };
    assert_ne!(st, FkStatus::Ok);
    assert!(s.is_null());
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/foalkit.h")).unwrap();
    for f in [
        "fk_last_error_message",
        "fk_version",
        "fk_image_new",
        "fk_image_copy",
        "fk_image_free",
        "fk_mask_new",
        "fk_labels_new",
        "fk_ssim",
        "fk_midf",
        "fk_apce",
        "fk_class_miou",
        "fk_oamix",
        "fk_scheduler_new",
        "fk_scheduler_update",
        "fk_scheduler_next",
        "fk_scheduler_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing");
    }
}
