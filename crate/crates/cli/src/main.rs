use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mammalvox::allometry::{self, AllometricProfile};
use mammalvox::analysis::{self, f0_track, spectral_peaks, DEFAULT_HOP, DEFAULT_WINDOW};
use mammalvox::engine::{breathing_session_with, normalize_peak, BreathingOptions};
use mammalvox::voice::{PresetRegistry, VoiceParams};
use mammalvox::wav::{read_wav, write_wav};
use mammalvox::{render_utterance, AffectState, AudioBuffer, RenderRequest, UtteranceKind};
use mammalvox_service::ServiceConfig;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "mammalvox", version, about = "Mammalian voices from body mass and affect")]
struct Cli {
    /// Preset library to use instead of the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    presets_file: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the quantities that follow from a body mass.
    Profile {
        /// kg
        #[arg(long, allow_negative_numbers = true)]
        mass: f64,
        #[arg(long)]
        json: bool,
    },
    /// Render one utterance to a WAV file.
    Synth {
        #[command(flatten)]
        voice: VoiceArgs,
        /// voiced, breath, snore, laugh, sneeze or cough. Defaults to the
        /// last vocalisation preset's type, else voiced.
        #[arg(long)]
        kind: Option<String>,
        #[arg(short, long, default_value = "out.wav")]
        output: PathBuf,
        /// Scale the result to peak at -3 dBFS.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        json: bool,
    },
    /// Render continuous breathing with occasional vocalisation.
    Breathe {
        #[command(flatten)]
        voice: VoiceArgs,
        /// Seconds.
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        /// Probability that an exhalation is voiced.
        #[arg(long, default_value_t = BreathingOptions::default().p_voc)]
        p_voc: f64,
        #[arg(short, long, default_value = "breathing.wav")]
        output: PathBuf,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        json: bool,
    },
    /// Spectrogram of a mono 16-bit WAV as a greyscale PNG and/or CSV.
    Spectrogram {
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        png: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Samples per frame.
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_HOP)]
        hop: usize,
    },
    /// List presets, or write the library as JSON.
    Presets {
        #[arg(long)]
        json: bool,
        /// Write the preset library to this file.
        #[arg(long, value_name = "FILE")]
        export: Option<PathBuf>,
    },
    /// Run the live design service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory holding the studio bundle.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct VoiceArgs {
    /// Applied in order: an animal replaces the voice, a vocalisation adjusts it.
    #[arg(long = "preset")]
    presets: Vec<String>,
    /// kg; applied after presets.
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    valence: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    arousal: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hz
    #[arg(long, env = "MAMMALVOX_SAMPLE_RATE")]
    sample_rate: Option<u32>,
    /// Slider override applied last, e.g. --set f0_base=500.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(mammalvox::Error),
    Io(String),
}

impl From<mammalvox::Error> for Failure {
    fn from(e: mammalvox::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_io() => 3,
            Failure::Io(_) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mammalvox: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let presets = match &cli.presets_file {
        Some(path) => PresetRegistry::load(path)?,
        None => PresetRegistry::builtin(),
    };
    match cli.command {
        Command::Profile { mass, json } => profile(mass, json),
        Command::Synth { voice, kind, output, normalize, json } => synth(&presets, &voice, kind.as_deref(), &output, normalize, json),
        Command::Breathe { voice, duration, p_voc, output, normalize, json } => {
            breathe(&presets, &voice, duration, p_voc, &output, normalize, json)
        }
        Command::Spectrogram { input, png, csv, window, hop } => spectrogram(&input, png, csv, window, hop),
        Command::Presets { json, export } => list_presets(&presets, json, export),
        Command::Serve { port, host, static_dir, seed } => serve(presets, SocketAddr::new(host, port), static_dir, seed),
    }
}

fn profile(mass: f64, json: bool) -> Outcome {
    let p = allometry::profile(mass)?;
    let formants = formants(&p)?;
    if json {
        let mut v = serde_json::to_value(p).expect("profile serialises");
        v["formants"] = json!(formants);
        println!("{v:#}");
        return Ok(());
    }
    print!("{}", profile_table(&p, &formants));
    Ok(())
}

fn formants(p: &AllometricProfile) -> mammalvox::Result<[f64; 3]> {
    let mouth = VoiceParams::default().mouth_open_base;
    Ok([
        allometry::formant_frequency(1, mouth, p.tract_length)?,
        allometry::formant_frequency(2, mouth, p.tract_length)?,
        allometry::formant_frequency(3, mouth, p.tract_length)?,
    ])
}

fn profile_table(p: &AllometricProfile, formants: &[f64; 3]) -> String {
    let rows = [
        ("body mass", format!("{} kg", p.mass)),
        ("lung capacity C", format!("{:.1} mL", p.lung_capacity)),
        ("breathing rate B", format!("{:.3} Hz", p.breathing_rate)),
        ("airflow Q", format!("{:.4} L/s", p.flow_rate)),
        ("fundamental F0", format!("{:.1} Hz", p.fundamental_frequency)),
        ("tract length L", format!("{:.2} cm", p.tract_length)),
        ("utterance T", format!("{:.2} s", p.utterance_duration)),
        (
            "formants F1-F3",
            format!("{:.0} / {:.0} / {:.0} Hz", formants[0], formants[1], formants[2]),
        ),
    ];
    rows.iter().map(|(k, v)| format!("{k:<18}{v}\n")).collect()
}

/// Voice from the flags, plus the utterance type of the last vocalisation
/// preset.
fn build_voice(presets: &PresetRegistry, args: &VoiceArgs) -> Result<(VoiceParams, Option<UtteranceKind>), Failure> {
    let mut params = VoiceParams::default();
    let mut kind = None;
    for name in &args.presets {
        let preset = presets.get(name)?;
        params = preset.layer(&params)?;
        kind = preset.template.or(kind);
    }
    if let Some(mass) = args.mass {
        params.set_mass(mass)?;
    }
    if let Some(sr) = args.sample_rate {
        params.set("sample_rate", sr as f64)?;
    }
    for entry in &args.overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{entry}`")))?;
        let value = match value.trim() {
            "true" => 1.0,
            "false" => 0.0,
            v => v.parse().map_err(|_| Failure::Usage(format!("--set {key}: `{v}` is not a number")))?,
        };
        params.set(key.trim(), value)?;
    }
    Ok((params, kind))
}

fn affect(args: &VoiceArgs) -> Result<AffectState, Failure> {
    for (name, v) in [("valence", args.valence), ("arousal", args.arousal)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Failure::Usage(format!("--{name} {v} is outside [-1, 1]")));
        }
    }
    Ok(AffectState::new(args.valence, args.arousal))
}

fn write(buffer: &mut AudioBuffer, path: &PathBuf, normalize: bool) -> Outcome {
    if normalize {
        normalize_peak(buffer);
    }
    write_wav(buffer, path)?;
    Ok(())
}

/// Median, min and max of the voiced frames, and the voiced fraction.
fn f0_summary(buffer: &AudioBuffer) -> Option<serde_json::Value> {
    const WINDOW: usize = 4096;
    let hi = (0.45 * buffer.sample_rate as f64).min(4000.0);
    let track = f0_track(buffer, (45.0, hi), WINDOW, WINDOW / 4).ok()?;
    let mut voiced: Vec<f64> = track.iter().filter_map(|(_, e)| e.frequency).collect();
    if voiced.is_empty() {
        return Some(json!({"voiced_fraction": 0.0}));
    }
    voiced.sort_by(f64::total_cmp);
    Some(json!({
        "median_hz": voiced[voiced.len() / 2],
        "min_hz": voiced[0],
        "max_hz": voiced[voiced.len() - 1],
        "voiced_fraction": voiced.len() as f64 / track.len() as f64,
    }))
}

fn f0_line(summary: &Option<serde_json::Value>) -> String {
    match summary {
        Some(s) if s.get("median_hz").is_some() => format!(
            "F0 median {:.1} Hz (range {:.1}-{:.1} Hz), voiced in {:.0}% of frames",
            s["median_hz"].as_f64().unwrap_or_default(),
            s["min_hz"].as_f64().unwrap_or_default(),
            s["max_hz"].as_f64().unwrap_or_default(),
            100.0 * s["voiced_fraction"].as_f64().unwrap_or_default()
        ),
        Some(_) => "F0: no voiced frames".to_string(),
        None => "F0: too short to measure".to_string(),
    }
}

fn synth(presets: &PresetRegistry, args: &VoiceArgs, kind: Option<&str>, output: &PathBuf, normalize: bool, as_json: bool) -> Outcome {
    let (params, preset_kind) = build_voice(presets, args)?;
    let kind = match kind {
        Some(name) => UtteranceKind::from_name(name).ok_or_else(|| {
            let names: Vec<&str> = UtteranceKind::NAMED.iter().map(|k| k.name()).collect();
            Failure::Usage(format!("unknown utterance kind `{name}`; expected one of {}", names.join(", ")))
        })?,
        None => preset_kind.unwrap_or(UtteranceKind::Voiced),
    };
    let mut buffer = render_utterance(&RenderRequest::new(params, affect(args)?, args.seed, kind))?;
    write(&mut buffer, output, normalize)?;
    let f0 = f0_summary(&buffer);
    if as_json {
        let v = json!({
            "output": output,
            "kind": kind.name(),
            "duration_s": buffer.duration(),
            "sample_rate": buffer.sample_rate,
            "peak": buffer.peak(),
            "f0": f0,
            "params": params,
        });
        println!("{v:#}");
    } else {
        println!("wrote {} ({}, {:.3} s at {} Hz)", output.display(), kind.name(), buffer.duration(), buffer.sample_rate);
        println!("{}", f0_line(&f0));
    }
    Ok(())
}

fn breathe(
    presets: &PresetRegistry,
    args: &VoiceArgs,
    duration: f64,
    p_voc: f64,
    output: &PathBuf,
    normalize: bool,
    as_json: bool,
) -> Outcome {
    let (params, _) = build_voice(presets, args)?;
    let options = BreathingOptions { p_voc, ..BreathingOptions::default() };
    let mut session = breathing_session_with(&params, affect(args)?, duration, args.seed, &options)?;
    write(&mut session.buffer, output, normalize)?;
    let voiced = session.cycles.iter().filter(|c| c.voiced).count();
    if as_json {
        let v = json!({
            "output": output,
            "duration_s": session.buffer.duration(),
            "breathing_rate_hz": session.breathing_rate,
            "cycles": session.cycles,
        });
        println!("{v:#}");
    } else {
        println!(
            "wrote {} ({:.3} s at {} Hz): {:.3} Hz breathing, {} exhalations, {} voiced",
            output.display(),
            session.buffer.duration(),
            session.buffer.sample_rate,
            session.breathing_rate,
            session.cycles.len(),
            voiced
        );
    }
    Ok(())
}

fn spectrogram(input: &PathBuf, png: Option<PathBuf>, csv: Option<PathBuf>, window: usize, hop: usize) -> Outcome {
    if png.is_none() && csv.is_none() {
        return Err(Failure::Usage("nothing to write; pass --png and/or --csv".into()));
    }
    let buffer = read_wav(input)?;
    let spec = analysis::spectrogram(&buffer, window, hop)?;
    if let Some(path) = &png {
        analysis::write_spectrogram_png(&spec, path)?;
    }
    if let Some(path) = &csv {
        analysis::write_spectrogram_csv(&spec, path)?;
    }
    let peaks = spectral_peaks(&spec, 3)?;
    let peaks: Vec<String> = peaks.peaks.iter().map(|p| format!("{p:.1}")).collect();
    println!(
        "{} frames x {} bins ({:.2} Hz/bin); strongest peaks: {} Hz",
        spec.frame_count(),
        spec.bin_count(),
        spec.resolution(),
        if peaks.is_empty() { "none".to_string() } else { peaks.join(", ") }
    );
    Ok(())
}

fn list_presets(presets: &PresetRegistry, as_json: bool, export: Option<PathBuf>) -> Outcome {
    if let Some(path) = export {
        presets.save(&path)?;
        println!("wrote {} presets to {}", presets.presets.len(), path.display());
        return Ok(());
    }
    if as_json {
        println!("{}", presets.to_json());
        return Ok(());
    }
    for p in &presets.presets {
        let kind = serde_json::to_value(p.kind).expect("kind serialises");
        let overrides: Vec<String> = p.overrides.iter().map(|(k, v)| format!("{k}={}", v.as_f64())).collect();
        println!("{:<8} {:<13} {}", p.name, kind.as_str().unwrap_or_default(), overrides.join(" "));
    }
    Ok(())
}

fn serve(presets: PresetRegistry, addr: SocketAddr, static_dir: Option<PathBuf>, seed: u64) -> Outcome {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let config = ServiceConfig { addr, static_dir, seed, presets, ..ServiceConfig::default() };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(format!("runtime: {e}")))?;
    runtime
        .block_on(mammalvox_service::serve(config))
        .map_err(|e| Failure::Io(format!("{addr}: {e}")))
}
