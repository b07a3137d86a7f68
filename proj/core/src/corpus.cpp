/*
 * Copyright 2026 The PVAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pvad/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pvad {

namespace {

using nlohmann::json;

std::string record_id(const std::string& split, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", index);
  return split + "-" + buf;
}

json augment_to_json(const AugmentSpec& a) {
  json j;
  if (a.snr_db.has_value()) {
    j["snr_db"] = *a.snr_db;
  } else {
    j["snr_db"] = nullptr;
  }
  j["noise"] = noise_kind_name(a.noise_kind);
  j["reverb_ms"] = a.reverb_decay_ms;
  j["seed"] = a.seed;
  return j;
}

AugmentSpec augment_from_json(const json& j) {
  AugmentSpec a;
  if (!j.at("snr_db").is_null()) a.snr_db = j.at("snr_db").get<double>();
  a.noise_kind = noise_kind_from_string(j.at("noise").get<std::string>());
  a.reverb_decay_ms = j.at("reverb_ms").get<double>();
  a.seed = j.at("seed").get<uint64_t>();
  return a;
}

json record_to_json(const ManifestRecord& r) {
  json j;
  j["id"] = r.id;
  j["split"] = r.split;
  j["audio"] = r.audio_path;
  j["labels"] = r.label_path;
  j["target"] = r.target_speaker_id;
  json sources = json::array();
  for (const auto& s : r.sources) {
    sources.push_back({{"speaker", s.speaker_id},
                       {"duration_s", s.duration_s},
                       {"seed", s.seed}});
  }
  j["sources"] = std::move(sources);
  if (r.augment.has_value()) {
    j["augment"] = augment_to_json(*r.augment);
  } else {
    j["augment"] = nullptr;
  }
  j["seed"] = r.seed;
  return j;
}

ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  r.id = j.at("id").get<std::string>();
  r.split = j.at("split").get<std::string>();
  r.audio_path = j.at("audio").get<std::string>();
  r.label_path = j.at("labels").get<std::string>();
  r.target_speaker_id = j.at("target").get<std::string>();
  for (const auto& s : j.at("sources")) {
    r.sources.push_back({s.at("speaker").get<std::string>(),
                         s.at("duration_s").get<double>(),
                         s.at("seed").get<uint64_t>()});
  }
  if (!j.at("augment").is_null()) r.augment = augment_from_json(j.at("augment"));
  r.seed = j.at("seed").get<uint64_t>();
  return r;
}

void write_speakers_file(const std::filesystem::path& path,
                         const CorpusManifest& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  out.precision(9);
  for (const auto& s : m.speakers) {
    out << s.speaker_id << ' ' << m.speaker_split.at(s.speaker_id) << ' '
        << s.timbre_seed;
    for (int i = 0; i < s.voice_point.size(); ++i) out << ' ' << s.voice_point(i);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void read_speakers_file(const std::filesystem::path& path, CorpusManifest& m) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    SyntheticSpeaker s;
    std::string split;
    if (!(ls >> s.speaker_id >> split >> s.timbre_seed)) {
      throw DataError("malformed speaker line in " + path.string());
    }
    s.voice_point.resize(kEmbeddingDim);
    for (int i = 0; i < kEmbeddingDim; ++i) {
      if (!(ls >> s.voice_point(i))) {
        throw DataError("speaker '" + s.speaker_id + "' in " + path.string() +
                        " has fewer than " + std::to_string(kEmbeddingDim) +
                        " voice point values");
      }
    }
    m.speaker_split[s.speaker_id] = split;
    m.speakers.push_back(std::move(s));
  }
}

AugmentSpec sample_augment(Rng& rng, const CorpusConfig& cfg,
                           bool force_noise) {
  const bool with_noise = force_noise || rng.uniform() < cfg.noise_prob;
  const bool with_reverb = rng.uniform() < cfg.reverb_prob;
  const double snr = rng.uniform(cfg.snr_min_db, cfg.snr_max_db);
  const int kind = static_cast<int>(rng.uniform_int(0, 2));
  const double decay =
      rng.uniform(cfg.reverb_decay_min_ms, cfg.reverb_decay_max_ms);
  AugmentSpec a;
  a.seed = rng.next_u64();
  if (with_noise) {
    a.snr_db = snr;
    a.noise_kind = static_cast<NoiseKind>(kind);
  }
  if (with_reverb) a.reverb_decay_ms = decay;
  return a;
}

}  // namespace

void CorpusConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("corpus: out_dir required");
  if (num_speakers < 2 || num_train_speakers < 1 ||
      num_train_speakers >= num_speakers) {
    throw ConfigError("corpus: need 1 <= train speakers < total speakers");
  }
  if (train_utterances < 1 || test_utterances < 1) {
    throw ConfigError("corpus: utterance counts must be >= 1");
  }
  if (concat_min < 1 || concat_min > concat_max) {
    throw ConfigError("corpus: need 1 <= concat_min <= concat_max");
  }
  const int test_speakers = num_speakers - num_train_speakers;
  if (concat_max > num_train_speakers || concat_max > test_speakers) {
    throw ConfigError("corpus: concat_max exceeds a split's speaker pool");
  }
  if (!(source_duration_min_s >= 0.5) ||
      source_duration_min_s > source_duration_max_s) {
    throw ConfigError("corpus: need 0.5 <= duration_min <= duration_max");
  }
  if (snr_min_db > snr_max_db) throw ConfigError("corpus: bad SNR range");
  if (noise_prob < 0 || noise_prob > 1 || reverb_prob < 0 || reverb_prob > 1) {
    throw ConfigError("corpus: probabilities must be in [0,1]");
  }
  if (reverb_decay_min_ms <= 0 || reverb_decay_min_ms > reverb_decay_max_ms) {
    throw ConfigError("corpus: bad reverb decay range");
  }
  if (enroll_utterances < 1 || enroll_frames < 1 || enroll_sigma < 0) {
    throw ConfigError("corpus: bad enrollment settings");
  }
}

const SyntheticSpeaker& CorpusManifest::speaker(const std::string& id) const {
  for (const auto& s : speakers) {
    if (s.speaker_id == id) return s;
  }
  throw DataError("unknown speaker id '" + id + "'");
}

std::vector<const ManifestRecord*> CorpusManifest::split_records(
    const std::string& split) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

ConcatUtterance rebuild_clean(const CorpusManifest& manifest,
                              const ManifestRecord& rec) {
  std::vector<SourceUtterance> sources;
  sources.reserve(rec.sources.size());
  for (const auto& spec : rec.sources) {
    sources.push_back(synth_source_utterance(manifest.speaker(spec.speaker_id),
                                             spec.duration_s, spec.seed));
  }
  return concat_utterances(sources, rec.target_speaker_id);
}

ConcatUtterance rebuild_record(const CorpusManifest& manifest,
                               const ManifestRecord& rec) {
  ConcatUtterance utt = rebuild_clean(manifest, rec);
  if (rec.augment.has_value()) utt = apply_augment(utt, *rec.augment);
  return utt;
}

void save_labels(const std::filesystem::path& path,
                 const std::vector<PvadClass>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  for (PvadClass c : labels) out << token_from_pvad_class(c) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<PvadClass> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<PvadClass> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    labels.push_back(pvad_class_from_token(line));
  }
  return labels;
}

std::filesystem::path profile_path(const std::filesystem::path& corpus_root,
                                   const std::string& speaker_id) {
  return corpus_root / "profiles" / (speaker_id + ".profile");
}

CorpusManifest generate_corpus(const CorpusConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir / "audio");
  fs::create_directories(cfg.out_dir / "labels");
  fs::create_directories(cfg.out_dir / "profiles");

  CorpusManifest m;
  m.root = cfg.out_dir;

  Rng spk_rng(hash_combine(cfg.seed, hash_str("speakers")));
  for (int i = 0; i < cfg.num_speakers; ++i) {
    Rng r = spk_rng.child(static_cast<uint64_t>(i));
    SyntheticSpeaker s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", i);
    s.speaker_id = std::string("spk") + buf;
    s.voice_point = sample_voice_point(r);
    s.timbre_seed = r.next_u64();
    m.speaker_split[s.speaker_id] =
        i < cfg.num_train_speakers ? "train" : "test";
    m.speakers.push_back(std::move(s));
  }
  write_speakers_file(cfg.out_dir / "speakers.txt", m);

  Rng enroll_rng(hash_combine(cfg.seed, hash_str("enroll")));
  for (const auto& s : m.speakers) {
    Rng r = enroll_rng.child(hash_str(s.speaker_id));
    const EnrollmentProfile profile = enroll_synthetic(
        s, cfg.enroll_utterances, cfg.enroll_frames, cfg.enroll_sigma, r);
    save_profile(profile_path(cfg.out_dir, s.speaker_id), profile);
  }

  std::vector<std::string> train_pool, test_pool;
  for (const auto& s : m.speakers) {
    (m.speaker_split.at(s.speaker_id) == "train" ? train_pool : test_pool)
        .push_back(s.speaker_id);
  }

  auto make_record = [&](const std::string& split, int index,
                         const std::vector<std::string>& pool,
                         bool augmented) {
    const uint64_t rec_seed =
        hash_combine(hash_combine(cfg.seed, hash_str(split)),
                     static_cast<uint64_t>(index));
    Rng rng(rec_seed);
    ManifestRecord rec;
    rec.id = record_id(split, index);
    rec.split = split;
    rec.audio_path = "audio/" + rec.id + ".wav";
    rec.label_path = "labels/" + rec.id + ".txt";
    rec.seed = rec_seed;

    const int n_src = sample_n(cfg.concat_min, cfg.concat_max, rng);
    // Partial Fisher-Yates draw of n_src distinct speakers.
    std::vector<std::string> pick = pool;
    for (int i = 0; i < n_src; ++i) {
      const auto j = rng.uniform_int(i, static_cast<int64_t>(pick.size()) - 1);
      std::swap(pick[static_cast<size_t>(i)], pick[static_cast<size_t>(j)]);
    }
    pick.resize(static_cast<size_t>(n_src));
    rec.target_speaker_id =
        pick[static_cast<size_t>(rng.uniform_int(0, n_src - 1))];
    for (const auto& speaker_id : pick) {
      SourceSpec s;
      s.speaker_id = speaker_id;
      s.duration_s =
          rng.uniform(cfg.source_duration_min_s, cfg.source_duration_max_s);
      s.seed = rng.next_u64();
      rec.sources.push_back(std::move(s));
    }
    if (augmented) {
      AugmentSpec a = sample_augment(rng, cfg, split == "test_mtr");
      if (!a.is_identity()) rec.augment = a;
    }
    return rec;
  };

  for (int i = 0; i < cfg.train_utterances; ++i) {
    m.records.push_back(make_record("train", i, train_pool, cfg.mtr));
  }
  for (int i = 0; i < cfg.test_utterances; ++i) {
    m.records.push_back(make_record("test", i, test_pool, false));
  }
  if (cfg.mtr) {
    // The MTR test split reuses the clean test content with augmentation
    // on top, so clean/noisy comparisons see the same underlying speech.
    for (int i = 0; i < cfg.test_utterances; ++i) {
      ManifestRecord rec = make_record("test", i, test_pool, false);
      rec.split = "test_mtr";
      rec.id = record_id("test_mtr", i);
      rec.audio_path = "audio/" + rec.id + ".wav";
      rec.label_path = "labels/" + rec.id + ".txt";
      rec.seed = hash_combine(rec.seed, hash_str("mtr"));
      Rng rng(rec.seed);
      rec.augment = sample_augment(rng, cfg, /*force_noise=*/true);
      m.records.push_back(std::move(rec));
    }
  }

  for (const auto& rec : m.records) {
    const ConcatUtterance utt = rebuild_record(m, rec);
    bool has_tss = false;
    for (PvadClass c : utt.frame_labels) has_tss |= c == PvadClass::kTss;
    if (!has_tss) {
      throw DataError("generated record " + rec.id + " has no tss frames");
    }
    write_wav(cfg.out_dir / rec.audio_path, utt.audio);
    save_labels(cfg.out_dir / rec.label_path, utt.frame_labels);
  }

  {
    std::ofstream out(cfg.out_dir / "manifest.jsonl");
    if (!out) throw IoError("cannot create manifest.jsonl");
    for (const auto& rec : m.records) out << record_to_json(rec).dump() << '\n';
    if (!out) throw IoError("write failed: manifest.jsonl");
  }
  {
    json meta;
    meta["seed"] = cfg.seed;
    meta["num_speakers"] = cfg.num_speakers;
    meta["num_train_speakers"] = cfg.num_train_speakers;
    meta["train_utterances"] = cfg.train_utterances;
    meta["test_utterances"] = cfg.test_utterances;
    meta["concat_min"] = cfg.concat_min;
    meta["concat_max"] = cfg.concat_max;
    meta["source_duration_min_s"] = cfg.source_duration_min_s;
    meta["source_duration_max_s"] = cfg.source_duration_max_s;
    meta["mtr"] = cfg.mtr;
    meta["noise_prob"] = cfg.noise_prob;
    meta["snr_min_db"] = cfg.snr_min_db;
    meta["snr_max_db"] = cfg.snr_max_db;
    meta["reverb_prob"] = cfg.reverb_prob;
    meta["reverb_decay_min_ms"] = cfg.reverb_decay_min_ms;
    meta["reverb_decay_max_ms"] = cfg.reverb_decay_max_ms;
    meta["enroll_utterances"] = cfg.enroll_utterances;
    meta["enroll_frames"] = cfg.enroll_frames;
    meta["enroll_sigma"] = cfg.enroll_sigma;
    std::ofstream out(cfg.out_dir / "corpus.json");
    if (!out) throw IoError("cannot create corpus.json");
    out << meta.dump(2) << '\n';
  }
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path& corpus_root) {
  CorpusManifest m;
  m.root = corpus_root;
  read_speakers_file(corpus_root / "speakers.txt", m);

  const auto manifest_path = corpus_root / "manifest.jsonl";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      m.records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError("manifest.jsonl line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  if (m.records.empty()) {
    throw DataError("manifest.jsonl is empty: " + manifest_path.string());
  }
  return m;
}

std::vector<float> record_frame_scores(const CorpusManifest& manifest,
                                       const ManifestRecord& rec,
                                       const ConcatUtterance& utt,
                                       const SpeakerEmbedding& target,
                                       const EmbedderConfig& cfg) {
  std::vector<Eigen::VectorXf> voice_points;
  voice_points.reserve(utt.speaker_ids.size());
  for (const auto& id : utt.speaker_ids) {
    voice_points.push_back(manifest.speaker(id).voice_point);
  }
  Rng rng(hash_combine(rec.seed, hash_str("frame-scores")));
  return frame_scores(utt.scores_attribution(), voice_points, target, cfg, rng);
}

ValidationReport validate_corpus(const CorpusManifest& manifest) {
  ValidationReport report;
  std::set<std::string> train_speakers, test_speakers;

  for (const auto& rec : manifest.records) {
    report.records_checked += 1;
    auto complain = [&](const std::string& what) {
      report.problems.push_back(rec.id + ": " + what);
    };

    auto& pool = rec.split == "train" ? train_speakers : test_speakers;
    for (const auto& s : rec.sources) pool.insert(s.speaker_id);

    ConcatUtterance clean;
    try {
      clean = rebuild_clean(manifest, rec);
    } catch (const Error& e) {
      complain(std::string("rebuild failed: ") + e.what());
      continue;
    }

    // Labels on disk must match the regenerated ground truth.
    std::vector<PvadClass> disk_labels;
    try {
      disk_labels = load_labels(manifest.root / rec.label_path);
    } catch (const Error& e) {
      complain(std::string("labels unreadable: ") + e.what());
      continue;
    }
    if (disk_labels != clean.frame_labels) {
      complain("label file disagrees with regenerated labels");
    }
    if (static_cast<int>(disk_labels.size()) !=
        num_frames(clean.audio.num_samples(), FeatureConfig{})) {
      complain("label count does not match audio frame count");
    }
    if (std::find(disk_labels.begin(), disk_labels.end(), PvadClass::kTss) ==
        disk_labels.end()) {
      complain("no tss frames (target speaker absent)");
    }

    // Rebuild the augmented signal and compare against the WAV bit-wise.
    ConcatUtterance dry = clean;
    ConcatUtterance final_utt = clean;
    if (rec.augment.has_value()) {
      const AugmentSpec& a = *rec.augment;
      if (a.reverb_decay_ms > 0.0) {
        dry = apply_reverb(dry, a.reverb_decay_ms, a.seed);
      }
      if (a.snr_db.has_value()) {
        Rng rng(hash_combine(a.seed, hash_str("noise")));
        const AudioBuffer noise = gen_noise(
            a.noise_kind, dry.audio.num_samples(), dry.audio.sample_rate, rng);
        const MixDetail mix = mix_noise_detailed(dry, noise, *a.snr_db);
        final_utt = mix.mixed;

        // Re-measure the realized SNR from the mixed components.
        AudioBuffer sig;
        sig.sample_rate = dry.audio.sample_rate;
        sig.samples = mix.signal_component;
        const double p_speech = speech_frame_power(sig, clean.frame_labels);
        double p_noise = 0.0;
        for (float v : mix.noise_component) {
          p_noise += static_cast<double>(v) * v;
        }
        p_noise /= static_cast<double>(mix.noise_component.size());
        const double measured = 10.0 * std::log10(p_speech / p_noise);
        if (std::abs(measured - *a.snr_db) > 0.1) {
          complain("SNR re-measurement off: wanted " +
                   std::to_string(*a.snr_db) + " dB, measured " +
                   std::to_string(measured) + " dB");
        }
      } else {
        final_utt = dry;
      }
    }

    AudioBuffer disk_audio;
    try {
      disk_audio = read_wav(manifest.root / rec.audio_path);
    } catch (const Error& e) {
      complain(std::string("audio unreadable: ") + e.what());
      continue;
    }
    if (disk_audio.num_samples() != final_utt.audio.num_samples()) {
      complain("audio length mismatch");
      continue;
    }
    for (int64_t i = 0; i < disk_audio.num_samples(); ++i) {
      const auto k = static_cast<size_t>(i);
      if (pcm16_from_float(disk_audio.samples[k]) !=
          pcm16_from_float(final_utt.audio.samples[k])) {
        complain("audio differs from regenerated signal at sample " +
                 std::to_string(i));
        break;
      }
    }
  }

  for (const auto& s : train_speakers) {
    if (test_speakers.count(s) > 0) {
      report.problems.push_back("speaker " + s +
                                " appears in both train and test splits");
    }
  }
  for (const auto& [id, split] : manifest.speaker_split) {
    (void)split;
    if (train_speakers.count(id) == 0 && test_speakers.count(id) == 0) {
      continue;  // unused speakers are fine
    }
    const auto& used = train_speakers.count(id) > 0 ? "train" : "test";
    if (manifest.speaker_split.at(id) != used) {
      report.problems.push_back("speaker " + id + " used outside its split");
    }
  }
  return report;
}

}  // namespace pvad
