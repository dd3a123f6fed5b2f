use std::ffi::{CStr, CString};
use std::ptr;

use hermite_ffi::*;

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let v = CStr::from_ptr(s).to_str().unwrap().to_owned();
    hermite_string_free(s);
    v
}

#[test]
fn cf_stream_prefix() {
    let alpha = CString::new("3").unwrap();
    let mut stream = ptr::null_mut();
    unsafe {
        assert_eq!(hermite_cf_stream_new(alpha.as_ptr(), 11, 0.0, &mut stream), HermiteStatus::Ok);
        let mut got = Vec::new();
        let mut index = 0u64;
        let mut value = ptr::null_mut();
        loop {
            match hermite_cf_stream_next(stream, &mut index, &mut value) {
                HermiteStatus::Ok => got.push((index, take(value))),
                HermiteStatus::End => break,
                s => panic!("{s:?}"),
            }
        }
        hermite_cf_stream_free(stream);
        let values: Vec<&str> = got.iter().map(|(_, v)| v.as_str()).collect();
        assert_eq!(values, ["20", "11", "1", "2", "4", "3", "1", "5", "1", "2", "16"]);
        assert_eq!(got.last().unwrap().0, 10);
    }
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("1/0").unwrap();
    let mut stream = ptr::null_mut();
    unsafe {
        assert_eq!(hermite_cf_stream_new(bad.as_ptr(), 5, 0.0, &mut stream), HermiteStatus::InvalidArgument);
        assert!(stream.is_null());
        assert!(!CStr::from_ptr(hermite_last_error()).to_bytes().is_empty());
        assert_eq!(hermite_cf_stream_new(ptr::null(), 5, 0.0, &mut stream), HermiteStatus::NullPointer);
        hermite_cf_stream_free(ptr::null_mut());
        hermite_string_free(ptr::null_mut());
    }
}

#[test]
fn mahler_and_forest() {
    let alphas = CString::new("0,3").unwrap();
    let n = [2i64, 2];
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(hermite_mahler_det(alphas.as_ptr(), n.as_ptr(), 2, &mut out), HermiteStatus::Ok);
        assert_eq!(take(out), "81");
        assert_eq!(hermite_mahler_det(alphas.as_ptr(), n.as_ptr(), 1, &mut out), HermiteStatus::InvalidArgument);
        let pts = CString::new("0,3,6,1").unwrap();
        assert_eq!(hermite_forest_json(pts.as_ptr(), 3, &mut out), HermiteStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v, serde_json::json!({"roots": [0, 3], "edges": [[0, 1], [0, 2]]}));
        assert_eq!(hermite_forest_json(pts.as_ptr(), 4, &mut out), HermiteStatus::InvalidArgument);
    }
}

#[test]
fn semiresultant_values() {
    let (re, im, m) = ([1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0], [1u32; 4]);
    let (mut l, mut r, mut d) = ([0.0; 2], [0.0; 2], 1.0);
    unsafe {
        let s = hermite_semiresultant(re.as_ptr(), im.as_ptr(), m.as_ptr(), 4, l.as_mut_ptr(), r.as_mut_ptr(), &mut d);
        assert_eq!(s, HermiteStatus::Ok);
        assert!((l[0] + 256.0).abs() < 1e-9 && l[1].abs() < 1e-9);
        assert!((r[0] + 256.0).abs() < 1e-9);
        assert!(d < 1e-12);
        assert_eq!(CStr::from_ptr(hermite_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
