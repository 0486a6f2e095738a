//! Deterministic replay of the warden scenario: Bob signs (or embeds), the
//! channel optionally tampers, Watson verifies with the public key only and
//! forwards or withholds, Alice verifies and recovers the message.

use std::fmt::{self, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;

use crate::codec::format_block;
use crate::error::{Error, Result};
use crate::keys::{import_keys, keygen, KeyPair, PublicKey};
use crate::modmath::parse_canonical_decimal;
use crate::oracle::Scheme;
use crate::rng::SeededRng;
use crate::scalar::Int;
use crate::sigscheme::{sign_bytes, verify_bytes, MessageVerdict, RMode, SignaturePair, SignedMessage};
use crate::subliminal::{covert_embed_text, covert_extract_text, verify_bundle, CovertBundle};

const SCENARIO_HEADER: &str = "oss-scenario v1";
const TRANSCRIPT_HEADER: &str = "oss-transcript v1";

const KEY_STREAM: u64 = 0;
const RUN_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TamperField {
    S1,
    S2,
    CoverByte,
    MsgByte,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TamperMode {
    /// Replace with a uniformly drawn different value.
    Random,
    /// Add a fixed offset, wrapping mod `n` for residues and mod 256 for bytes.
    Delta(BigInt),
}

/// A single post-signing modification, written `field@position[:mode]` where
/// mode is `random` (the default) or a signed offset such as `+3` or `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tamper {
    pub position: usize,
    pub field: TamperField,
    pub mode: TamperMode,
}

impl FromStr for Tamper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidScenario(format!("bad tamper spec {s:?}"));
        let (target, mode) = s.split_once(':').unwrap_or((s, "random"));
        let (field, position) = target.split_once('@').ok_or_else(bad)?;
        let field = match field {
            "s1" => TamperField::S1,
            "s2" => TamperField::S2,
            "cover_byte" => TamperField::CoverByte,
            "msg_byte" => TamperField::MsgByte,
            _ => return Err(bad()),
        };
        let position = parse_canonical_decimal(position).ok_or_else(bad)?;
        let mode = match mode {
            "random" => TamperMode::Random,
            _ => {
                let digits = mode.strip_prefix(['+', '-']).ok_or_else(bad)?;
                let magnitude: BigInt = parse_canonical_decimal(digits).ok_or_else(bad)?;
                TamperMode::Delta(if mode.starts_with('-') { -magnitude } else { magnitude })
            }
        };
        Ok(Tamper { position, field, mode })
    }
}

impl fmt::Display for Tamper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            TamperField::S1 => "s1",
            TamperField::S2 => "s2",
            TamperField::CoverByte => "cover_byte",
            TamperField::MsgByte => "msg_byte",
        };
        write!(f, "{field}@{}", self.position)?;
        match &self.mode {
            TamperMode::Random => write!(f, ":random"),
            TamperMode::Delta(d) if d.is_negative() => write!(f, ":{d}"),
            TamperMode::Delta(d) => write!(f, ":+{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub scheme: Scheme,
    pub secret: Vec<u8>,
    /// Required for the subliminal scheme, forbidden for the signature scheme.
    pub cover: Option<Vec<u8>>,
    pub keys: KeyPair<BigInt>,
    pub tamper: Option<Tamper>,
    pub seed: u64,
}

impl Scenario {
    /// Keys come from `seed` on a stream separate from the run itself.
    pub fn with_generated_keys(
        scheme: Scheme,
        secret: Vec<u8>,
        cover: Option<Vec<u8>>,
        bits: u64,
        tamper: Option<Tamper>,
        seed: u64,
    ) -> Result<Self> {
        let keys = keygen(bits, bits.div_ceil(2), &mut SeededRng::with_stream(seed, KEY_STREAM))?;
        let scenario = Scenario {
            scheme,
            secret,
            cover,
            keys,
            tamper,
            seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn wire_len(&self) -> usize {
        match self.scheme {
            Scheme::Signature => self.secret.len(),
            Scheme::Subliminal => self.cover.as_ref().map_or(0, Vec::len),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidScenario(msg.into()));
        match (self.scheme, &self.cover) {
            (Scheme::Subliminal, None) => return invalid("the subliminal scheme needs a cover"),
            (Scheme::Signature, Some(_)) => return invalid("the signature scheme takes no cover"),
            (Scheme::Subliminal, Some(cover)) if cover.len() < self.secret.len() => {
                return Err(Error::CoverTooShort {
                    secret: self.secret.len(),
                    cover: cover.len(),
                })
            }
            _ => {}
        }
        if let Some(t) = &self.tamper {
            if t.position >= self.wire_len() {
                return invalid("tamper position is past the end of the message");
            }
            match (self.scheme, t.field) {
                (Scheme::Signature, TamperField::CoverByte) => {
                    return invalid("cover_byte needs the subliminal scheme")
                }
                (Scheme::Subliminal, TamperField::MsgByte) => return invalid("msg_byte needs the signature scheme"),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn to_scenario_file(&self) -> String {
        let mut out = format!("{SCENARIO_HEADER}\nscheme {}\n", self.scheme);
        writeln!(out, "secret {}", self.secret.escape_ascii()).unwrap();
        if let Some(cover) = &self.cover {
            writeln!(out, "cover {}", cover.escape_ascii()).unwrap();
        }
        writeln!(out, "n {}\nk {}", self.keys.n(), self.keys.private.k()).unwrap();
        if let Some(t) = &self.tamper {
            writeln!(out, "tamper {t}").unwrap();
        }
        writeln!(out, "seed {}", self.seed).unwrap();
        out
    }

    /// Reads the `oss-scenario v1` format. Keys are given either as `n` and
    /// `k` lines or as `bits`, in which case they are generated from the seed.
    /// `secret` and `cover` use the same escapes as [`u8::escape_ascii`].
    pub fn from_scenario_file(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidScenario(msg);
        let mut lines = text.lines();
        match lines.next() {
            Some(SCENARIO_HEADER) => {}
            other => return Err(Error::UnsupportedVersion(other.unwrap_or_default().to_string())),
        }
        let (mut scheme, mut secret, mut cover, mut n, mut k, mut bits, mut tamper, mut seed) =
            (None, None, None, None, None, None, None, None);
        for line in lines {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            let number =
                |v: &str| parse_canonical_decimal::<BigInt>(v).ok_or_else(|| bad(format!("bad number in {line:?}")));
            match key {
                "scheme" => scheme = Some(value.parse::<Scheme>().map_err(|e| bad(e.to_string()))?),
                "secret" => secret = Some(unescape(value).ok_or_else(|| bad(format!("bad escape in {line:?}")))?),
                "cover" => cover = Some(unescape(value).ok_or_else(|| bad(format!("bad escape in {line:?}")))?),
                "n" => n = Some(number(value)?),
                "k" => k = Some(number(value)?),
                "bits" => {
                    bits =
                        Some(parse_canonical_decimal::<u64>(value).ok_or_else(|| bad(format!("bad bits {value:?}")))?)
                }
                "tamper" => tamper = Some(value.parse::<Tamper>()?),
                "seed" => {
                    seed =
                        Some(parse_canonical_decimal::<u64>(value).ok_or_else(|| bad(format!("bad seed {value:?}")))?)
                }
                "" => {}
                _ => return Err(bad(format!("unknown scenario line {line:?}"))),
            }
        }
        let scheme = scheme.ok_or_else(|| bad("missing scheme".into()))?;
        let secret = secret.ok_or_else(|| bad("missing secret".into()))?;
        let seed = seed.ok_or_else(|| bad("missing seed".into()))?;
        match (n, k, bits) {
            (Some(n), Some(k), None) => {
                let keys = import_keys(n, k)?;
                let scenario = Scenario {
                    scheme,
                    secret,
                    cover,
                    keys,
                    tamper,
                    seed,
                };
                scenario.validate()?;
                Ok(scenario)
            }
            (None, None, Some(bits)) => Scenario::with_generated_keys(scheme, secret, cover, bits, tamper, seed),
            _ => Err(bad("give either `n` and `k`, or `bits`".into())),
        }
    }
}

fn unescape(text: &str) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    let mut bytes = text.bytes();
    while let Some(b) = bytes.next() {
        if b != b'\\' {
            out.push(b);
            continue;
        }
        match bytes.next()? {
            b'n' => out.push(b'\n'),
            b'r' => out.push(b'\r'),
            b't' => out.push(b'\t'),
            b'\\' => out.push(b'\\'),
            b'\'' => out.push(b'\''),
            b'"' => out.push(b'"'),
            b'x' => {
                let hex = [bytes.next()?, bytes.next()?];
                out.push(u8::from_str_radix(std::str::from_utf8(&hex).ok()?, 16).ok()?);
            }
            _ => return None,
        }
    }
    Some(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Actor {
    Bob,
    /// The network between Bob and Watson; only ever tampers.
    Channel,
    Watson,
    Alice,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub actor: Actor,
    pub action: String,
    pub payload: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub scheme: Scheme,
    pub seed: u64,
    pub n_bits: u64,
    pub events: Vec<Event>,
    pub warden_verdict: bool,
    pub receiver_output: Result<Vec<u8>, String>,
    /// True when the secret occurs nowhere in what Watson saw. For the
    /// signature scheme the message travels in the clear, so any non-empty
    /// message fails this check.
    pub leak_check: bool,
}

/// What crosses the wire and is therefore visible to Watson.
#[derive(Clone, Debug)]
struct Wire {
    text: Vec<u8>,
    pairs: Vec<SignaturePair<BigInt>>,
}

impl Wire {
    fn render(&self, label: &str) -> String {
        let pairs: Vec<String> = self.pairs.iter().map(|p| format!("{}:{}", p.s1, p.s2)).collect();
        format!("{label}=\"{}\" pairs={}", self.text.escape_ascii(), pairs.join(","))
    }

    fn contains(&self, needle: &[u8]) -> bool {
        let block = format_block(&self.pairs).into_bytes();
        [&self.text, &block]
            .iter()
            .any(|hay| hay.windows(needle.len()).any(|w| w == needle))
    }
}

/// Watson holds the public key and nothing else.
struct Warden {
    key: PublicKey<BigInt>,
}

impl Warden {
    fn inspect(&self, scheme: Scheme, wire: &Wire) -> MessageVerdict {
        match scheme {
            Scheme::Signature => verify_bytes(
                &SignedMessage {
                    message: wire.text.clone(),
                    pairs: wire.pairs.clone(),
                },
                &self.key,
            ),
            Scheme::Subliminal => verify_bundle(
                &CovertBundle {
                    cover: wire.text.clone(),
                    pairs: wire.pairs.clone(),
                    pad_byte: 0,
                },
                &self.key,
            ),
        }
    }
}

fn failed_positions(verdict: &MessageVerdict) -> String {
    let failed: Vec<String> = verdict
        .per_byte
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i.to_string())
        .collect();
    if failed.is_empty() {
        "none".into()
    } else {
        failed.join(",")
    }
}

fn apply_tamper(wire: &mut Wire, tamper: &Tamper, n: &BigInt, rng: &mut SeededRng) -> String {
    let i = tamper.position;
    match tamper.field {
        TamperField::S1 | TamperField::S2 => {
            let slot = match tamper.field {
                TamperField::S1 => &mut wire.pairs[i].s1,
                _ => &mut wire.pairs[i].s2,
            };
            let old = slot.clone();
            *slot = match &tamper.mode {
                TamperMode::Random => loop {
                    let v = BigInt::sample_range(rng, &BigInt::zero(), n);
                    if v != old {
                        break v;
                    }
                },
                TamperMode::Delta(d) => (&old + d).mod_floor(n),
            };
            format!("{tamper} old={old} new={slot}")
        }
        TamperField::CoverByte | TamperField::MsgByte => {
            let old = wire.text[i];
            wire.text[i] = match &tamper.mode {
                TamperMode::Random => loop {
                    let v: u8 = rng.gen();
                    if v != old {
                        break v;
                    }
                },
                TamperMode::Delta(d) => {
                    let shift: u8 = d.mod_floor(&BigInt::from(256)).try_into().expect("reduced mod 256");
                    old.wrapping_add(shift)
                }
            };
            format!("{tamper} old={old} new={}", wire.text[i])
        }
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Transcript> {
    s.validate()?;
    let mut rng = SeededRng::with_stream(s.seed, RUN_STREAM);
    let private = &s.keys.private;
    let n = s.keys.n();
    let mut events = Vec::new();
    let mut log = |actor, action: &str, payload: String| {
        events.push(Event {
            actor,
            action: action.into(),
            payload,
        })
    };

    log(Actor::Bob, "publish-key", format!("n={n} h={}", s.keys.public.h()));
    let mut wire = match s.scheme {
        Scheme::Signature => {
            let signed = sign_bytes(&s.secret, private, &mut rng, &RMode::Fresh)?;
            log(
                Actor::Bob,
                "sign",
                format!("bytes={} r_mode=fresh", signed.message.len()),
            );
            Wire {
                text: signed.message,
                pairs: signed.pairs,
            }
        }
        Scheme::Subliminal => {
            let cover = s.cover.as_deref().unwrap_or_default();
            let bundle = covert_embed_text(&s.secret, cover, private)?;
            log(
                Actor::Bob,
                "embed",
                format!(
                    "secret_len={} cover_len={} pad={}",
                    s.secret.len(),
                    cover.len(),
                    bundle.pad_byte
                ),
            );
            Wire {
                text: bundle.cover,
                pairs: bundle.pairs,
            }
        }
    };
    let text_label = match s.scheme {
        Scheme::Signature => "message",
        Scheme::Subliminal => "cover",
    };
    log(Actor::Bob, "send", format!("to=Watson pairs={}", wire.pairs.len()));

    if let Some(t) = &s.tamper {
        let detail = apply_tamper(&mut wire, t, n, &mut rng);
        log(Actor::Channel, "tamper", detail);
    }

    let warden = Warden {
        key: s.keys.public.clone(),
    };
    log(Actor::Watson, "receive", wire.render(text_label));
    let verdict = warden.inspect(s.scheme, &wire);
    let warden_verdict = verdict.is_valid();
    log(
        Actor::Watson,
        "verify",
        format!(
            "verdict={} failed={}",
            if warden_verdict { "accept" } else { "reject" },
            failed_positions(&verdict)
        ),
    );
    let leak_check = s.secret.is_empty() || !wire.contains(&s.secret);

    let receiver_output = if warden_verdict {
        log(Actor::Watson, "forward", "to=Alice".into());
        let own = warden.inspect(s.scheme, &wire);
        log(
            Actor::Alice,
            "verify",
            format!("verdict={}", if own.is_valid() { "accept" } else { "reject" }),
        );
        match s.scheme {
            Scheme::Signature if own.is_valid() => Ok(wire.text.clone()),
            Scheme::Signature => Err("signature rejected".to_string()),
            Scheme::Subliminal => {
                let bundle = CovertBundle {
                    cover: wire.text.clone(),
                    pairs: wire.pairs.clone(),
                    pad_byte: b' ',
                };
                covert_extract_text(&bundle, private).map_err(|e| e.to_string())
            }
        }
    } else {
        log(Actor::Watson, "withhold", "reason=verification-failed".into());
        Err("withheld by warden".to_string())
    };
    match &receiver_output {
        Ok(out) => log(Actor::Alice, "output", format!("text=\"{}\"", out.escape_ascii())),
        Err(e) => log(Actor::Alice, "fail", format!("error=\"{e}\"")),
    }

    Ok(Transcript {
        scheme: s.scheme,
        seed: s.seed,
        n_bits: n.bits(),
        events,
        warden_verdict,
        receiver_output,
        leak_check,
    })
}

/// Stable line-oriented rendering; equal transcripts render identically.
pub fn render_transcript(t: &Transcript) -> String {
    let mut out = format!(
        "{TRANSCRIPT_HEADER}\nscheme={}\nseed={}\nn_bits={}\n",
        t.scheme, t.seed, t.n_bits
    );
    for (i, e) in t.events.iter().enumerate() {
        writeln!(out, "event {} {} {} {}", i + 1, e.actor, e.action, e.payload).unwrap();
    }
    writeln!(
        out,
        "warden_verdict={}",
        if t.warden_verdict { "accept" } else { "reject" }
    )
    .unwrap();
    match &t.receiver_output {
        Ok(bytes) => writeln!(out, "receiver_output=\"{}\"", bytes.escape_ascii()).unwrap(),
        Err(e) => writeln!(out, "receiver_error=\"{e}\"").unwrap(),
    }
    writeln!(out, "leak_check={}", t.leak_check).unwrap();
    out
}

/// The verdict fields recovered from a rendered transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptSummary {
    pub warden_verdict: bool,
    pub receiver_output: Result<Vec<u8>, String>,
    pub leak_check: bool,
}

impl TranscriptSummary {
    pub fn of(t: &Transcript) -> Self {
        TranscriptSummary {
            warden_verdict: t.warden_verdict,
            receiver_output: t.receiver_output.clone(),
            leak_check: t.leak_check,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Malformed("transcript lacks verdict fields".into());
        let field = |name: &str| text.lines().find_map(|l| l.strip_prefix(name)?.strip_prefix('='));
        let quoted = |v: &str| v.strip_prefix('"')?.strip_suffix('"').map(str::to_string);
        let warden_verdict = match field("warden_verdict").ok_or_else(bad)? {
            "accept" => true,
            "reject" => false,
            _ => return Err(bad()),
        };
        let receiver_output = match (field("receiver_output"), field("receiver_error")) {
            (Some(v), None) => Ok(unescape(&quoted(v).ok_or_else(bad)?).ok_or_else(bad)?),
            (None, Some(e)) => Err(quoted(e).ok_or_else(bad)?),
            _ => return Err(bad()),
        };
        let leak_check = field("leak_check").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        Ok(TranscriptSummary {
            warden_verdict,
            receiver_output,
            leak_check,
        })
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_transcript(self))
    }
}
