mod common;

use std::io::Read;
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use meshpaint::backend::{
    check_keep_contract, local_generate, remote_generate, BackendError, GenerateRequest, GenerateResponse, ToyServer, KEEP_TOLERANCE, PROTOCOL_VERSION,
};
use meshpaint::diffusion::{
    make_linear_schedule, masked_sample, IdentityCodec, LatentCodec, SamplerConfig, ToyPredictor,
    DEFAULT_BETA_END, DEFAULT_BETA_START,
};
use meshpaint::raster::ViewImage;
use meshpaint::texstate::GenerationMask;

fn sample_request(res: usize, steps: usize, seed: u64) -> (GenerateRequest, GenerationMask) {
    let cond = common::toy_conditioning("a red brick", res);
    let mask = common::random_mask(res, seed);
    let req = GenerateRequest::encode(&cond.prompt, &cond.depth, &cond.init_view, &mask, 0.6, seed, steps).unwrap();
    (req, mask)
}

#[test]
fn loopback_matches_in_process_sampler() {
    let server = ToyServer::start("127.0.0.1:0").unwrap();
    let (req, mask) = sample_request(24, 80, 17);
    let remote = remote_generate(server.url(), &req, Duration::from_secs(60)).unwrap();
    let local = local_generate(&req).unwrap();
    assert_eq!(remote.image, local.image);
    assert_eq!(remote.backend_id, local.backend_id);

    // Independently drive the sampler on the decoded request.
    let d = req.decode().unwrap();
    let s = make_linear_schedule(80, DEFAULT_BETA_START, DEFAULT_BETA_END).unwrap();
    let cfg = SamplerConfig::new(0.6, 17, s.clone()).unwrap();
    let cond = meshpaint::diffusion::Conditioning {
        prompt: d.prompt.clone(),
        depth: d.depth.clone(),
        init_view: d.init_image.clone(),
    };
    let z = masked_sample(&IdentityCodec.encode(&d.init_image), &mask, &cfg, &ToyPredictor::new(s), &cond).unwrap();
    let expect = IdentityCodec.decode(&z).unwrap();
    assert_eq!(remote.decode_image(24).unwrap().to_png().unwrap(), expect.to_png().unwrap());
}

#[test]
fn silent_server_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    // Accept and read, never answer.
    let holder = std::thread::spawn(move || {
        let (mut sock, _) = listener.accept().unwrap();
        let mut buf = [0u8; 4096];
        while let Ok(n) = sock.read(&mut buf) {
            if n == 0 {
                break;
            }
        }
    });
    let (req, _) = sample_request(4, 5, 1);
    let start = Instant::now();
    let err = remote_generate(&url, &req, Duration::from_millis(300)).unwrap_err();
    assert!(matches!(err, BackendError::Timeout(_)), "{err:?}");
    assert!(start.elapsed() < Duration::from_secs(10));
    drop(holder);
}

#[test]
fn closed_port_is_unreachable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let (req, _) = sample_request(4, 5, 1);
    let err = remote_generate(&format!("http://127.0.0.1:{port}"), &req, Duration::from_secs(2)).unwrap_err();
    assert!(matches!(err, BackendError::Unreachable(_)), "{err:?}");
}

#[test]
fn health_and_error_statuses() {
    let server = ToyServer::start("127.0.0.1:0").unwrap();
    let health: serde_json::Value =
        ureq::get(&format!("{}/v1/health", server.url())).call().unwrap().into_json().unwrap();
    assert_eq!(health["status"], "ok");
    assert_eq!(health["version"], PROTOCOL_VERSION);

    let (mut req, _) = sample_request(4, 5, 1);
    req.version = 99;
    match remote_generate(server.url(), &req, Duration::from_secs(10)) {
        Err(BackendError::Backend(msg)) => assert!(msg.contains("400") && msg.contains("version"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let garbage = ureq::post(&format!("{}/v1/generate", server.url())).send_string("{\"prompt\": 3");
    assert!(matches!(garbage, Err(ureq::Error::Status(400, _))));
    let unknown = ureq::get(&format!("{}/v2/nothing", server.url())).call();
    assert!(matches!(unknown, Err(ureq::Error::Status(404, _))));
}

#[test]
fn unknown_fields_are_rejected() {
    let (req, _) = sample_request(4, 5, 1);
    let mut v = serde_json::to_value(&req).unwrap();
    v["guidance"] = 7.5.into();
    assert!(serde_json::from_value::<GenerateRequest>(v).is_err());
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/protocol").join(name)
}

fn keep_request() -> GenerateRequest {
    let cond = common::toy_conditioning("a red brick", 4);
    let mask = GenerationMask::uniform(4, meshpaint::texstate::Label::Keep);
    GenerateRequest::encode(&cond.prompt, &cond.depth, &cond.init_view, &mask, 0.6, 5, 20).unwrap()
}

/// Checks `request` against its golden files. Set `MESHPAINT_BLESS=1` to
/// regenerate them.
fn check_golden(stem: &str, req: &GenerateRequest) -> GenerateResponse {
    let mut resp = local_generate(req).unwrap();
    resp.elapsed_ms = 0;
    let (req_path, resp_path) = (fixture(&format!("{stem}_request.json")), fixture(&format!("{stem}_response.json")));
    if std::env::var_os("MESHPAINT_BLESS").is_some() {
        std::fs::create_dir_all(fixture("")).unwrap();
        std::fs::write(&req_path, serde_json::to_string_pretty(req).unwrap() + "\n").unwrap();
        std::fs::write(&resp_path, serde_json::to_string_pretty(&resp).unwrap() + "\n").unwrap();
    }
    let golden_req: GenerateRequest = serde_json::from_str(&std::fs::read_to_string(req_path).unwrap()).unwrap();
    let golden_resp: GenerateResponse = serde_json::from_str(&std::fs::read_to_string(resp_path).unwrap()).unwrap();
    assert_eq!(&golden_req, req);
    assert_eq!(golden_resp, resp);
    golden_resp
}

#[test]
fn golden_protocol_fixtures() {
    let (req, _) = sample_request(4, 20, 5);
    let resp = check_golden("generate", &req);
    let img: ViewImage = resp.decode_image(4).unwrap();
    assert_eq!(img.resolution, 4);

    let keep = keep_request();
    let resp = check_golden("keep", &keep);
    let d = keep.decode().unwrap();
    check_keep_contract(&d.init_image, &d.mask, &resp.decode_image(4).unwrap(), KEEP_TOLERANCE).unwrap();
}

#[test]
fn server_answers_golden_requests_repeatably() {
    let server = ToyServer::start("127.0.0.1:0").unwrap();
    for stem in ["generate", "keep"] {
        let req: GenerateRequest =
            serde_json::from_str(&std::fs::read_to_string(fixture(&format!("{stem}_request.json"))).unwrap()).unwrap();
        let a = remote_generate(server.url(), &req, Duration::from_secs(30)).unwrap();
        let b = remote_generate(server.url(), &req, Duration::from_secs(30)).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.decode_image(req.decode().unwrap().resolution()).unwrap().resolution, 4);
    }
}
