#include "disfluency/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "disfluency/corpus.hpp"
#include "disfluency/eval.hpp"
#include "disfluency/inserter.hpp"
#include "disfluency/llm_backend.hpp"
#include "disfluency/render.hpp"

#ifndef DISFL_VERSION
#define DISFL_VERSION "0.0.0"
#endif

namespace disfl::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// --- file helpers ---------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

CorpusFormat resolve_format(const std::string& path, const std::string& requested) {
  if (!requested.empty()) return *corpus_format_from_string(requested);
  const auto ext = fs::path(path).extension().string();
  if (ext == ".jsonl") return CorpusFormat::Jsonl;
  if (ext == ".bio" || ext == ".tsv") return CorpusFormat::Bio;
  return CorpusFormat::Markup;
}

std::vector<AnnotatedUtterance> load(const std::string& path, const std::string& format) {
  const auto fmt = resolve_format(path, format);
  if (path == "-") {
    switch (fmt) {
      case CorpusFormat::Markup:
        return read_markup(std::cin);
      case CorpusFormat::Bio:
        return read_bio(std::cin);
      case CorpusFormat::Jsonl:
        break;
    }
    return read_jsonl(std::cin);
  }
  return load_corpus(path, fmt);
}

/// One fluent utterance per non-blank line.
std::vector<std::vector<Token>> load_fluent(const std::string& path) {
  std::istringstream in(path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : read_file(path));
  std::vector<std::vector<Token>> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto tokens = tokenize_fluent(line);
    for (const auto& t : tokens) {
      // These would read back as false-start fragments or markup.
      if (make_token(t.text).kind != TokenKind::Word) throw FormatError(line_no, "'" + t.text + "' is not a fluent word");
    }
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

std::string format_utterances(std::span<const AnnotatedUtterance> us, const std::string& to) {
  std::ostringstream out;
  switch (*corpus_format_from_string(to)) {
    case CorpusFormat::Markup:
      write_markup(out, us);
      break;
    case CorpusFormat::Bio:
      write_bio(out, us);
      break;
    case CorpusFormat::Jsonl:
      write_jsonl(out, us);
      break;
  }
  return out.str();
}

const std::vector<std::string> kFormats = {"markup", "bio", "jsonl"};

// --- invocation bookkeeping ------------------------------------------------

struct Command {
  CLI::App* app = nullptr;
  std::string out;                          // --out; empty means stdout
  std::vector<const CLI::Option*> inputs;   // options naming input files
  const CLI::Option* seed_opt = nullptr;
  std::uint64_t seed = 0;
  std::function<std::string()> body;        // produces the artifact
};

CLI::Option* add_input(Command& c, const std::string& name, std::string& target, const std::string& help,
                       bool required = true) {
  auto* opt = c.app->add_option(name, target, help);
  if (required) opt->required();
  c.inputs.push_back(opt);
  return opt;
}

void add_out(Command& c) { c.app->add_option("-o,--out", c.out, "output file (default: stdout); writes <out>.manifest.json"); }

void add_seed(Command& c) {
  c.seed_opt = c.app->add_option("--seed", c.seed, "global random seed")->capture_default_str();
}

/// TOML/INI reader for `disfl <command> --config FILE`: keys outside any
/// section belong to the subcommand that was invoked.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  explicit SubcommandConfig(const CLI::App& root) : root_(root) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    const auto subs = root_.get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty() && item.name != "++" && item.name != "--") item.parents = {subs.front()->get_name()};
    }
    return items;
  }

 private:
  const CLI::App& root_;
};

bool is_flag(const CLI::Option* opt) { return opt->get_type_size_max() == 0; }

/// Effective options of a parsed subcommand (command line and config file
/// alike), in registration order, as --name=value words.
std::vector<std::string> effective_args(const CLI::App& app) {
  std::vector<std::string> args;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt == app.get_help_ptr() || opt->count() == 0) continue;
    const std::string name = "--" + opt->get_lnames().front();
    if (is_flag(opt)) {
      if (opt->as<bool>()) args.push_back(name);
      continue;
    }
    for (const auto& v : opt->results()) args.push_back(name + "=" + v);
  }
  return args;
}

ordered_json file_entry(const std::string& path) {
  ordered_json e;
  e["path"] = path;
  e["sha256"] = sha256_hex(read_file(path));
  return e;
}

std::string config_hash(const std::string& command, const std::vector<std::string>& args) {
  ordered_json doc;
  doc["command"] = command;
  doc["args"] = ordered_json::array();
  for (const auto& a : args) {
    if (a.rfind("--out=", 0) != 0) doc["args"].push_back(a);
  }
  return sha256_hex(doc.dump());
}

void write_manifest(const Command& c) {
  const auto args = effective_args(*c.app);
  ordered_json m;
  m["tool"] = "disfl";
  m["version"] = tool_version();
  m["command"] = c.app->get_name();
  m["args"] = args;
  m["config_hash"] = config_hash(c.app->get_name(), args);
  m["seed"] = c.seed_opt != nullptr ? ordered_json(c.seed) : ordered_json(nullptr);
  m["inputs"] = ordered_json::array();
  for (const CLI::Option* opt : c.inputs) {
    for (const auto& path : opt->results()) {
      if (path != "-") m["inputs"].push_back(file_entry(path));
    }
  }
  m["outputs"] = ordered_json::array({file_entry(c.out)});
  write_file(c.out + ".manifest.json", m.dump(2) + "\n");
}

// --- commands ----------------------------------------------------------------

struct IoOpts {
  std::string in;
  std::string format;
};

void add_corpus_input(Command& c, IoOpts& o) {
  add_input(c, "-i,--in", o.in, "input corpus ('-' for stdin)");
  c.app->add_option("-f,--format", o.format, "input format (default: from extension)")
      ->check(CLI::IsMember(kFormats));
}

std::string stats_table(const CorpusStats& s, std::size_t dropped) {
  std::ostringstream out;
  auto row = [&](std::string_view label, const std::string& value) {
    out << std::left << std::setw(44) << label << value << '\n';
  };
  auto fixed = [](double x, int digits) {
    std::ostringstream v;
    v << std::fixed << std::setprecision(digits) << x;
    return v.str();
  };
  row("Dataset", "Value");
  row("No. Sentences", std::to_string(s.n_sentences));
  row("Avg No. of tokens in fluent utterance", fixed(s.avg_tokens_fluent, 2));
  row("Avg No. of tokens in disfluent utterance", fixed(s.avg_tokens_disfluent, 2));
  row("Total No. fluent tokens", std::to_string(s.total_fluent_tokens));
  row("Total No. disfluent tokens", std::to_string(s.total_disfluent_tokens));
  row("Rate of disfluency, micro (%)", fixed(100.0 * s.rate_micro, 1) + "%");
  row("Rate of disfluency, macro (%)", fixed(100.0 * s.rate_macro, 1) + "%");
  if (dropped > 0) row("Dropped (no fluent tokens)", std::to_string(dropped));
  return out.str();
}

std::vector<double> read_numbers(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> xs;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream fields(line);
    for (std::string f; fields >> f;) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f.size() || !std::isfinite(x)) throw FormatError(line_no, path + ": not a number: '" + f + "'");
      xs.push_back(x);
    }
  }
  return xs;
}

template <class Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn fn) {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> results(n);
  std::vector<std::exception_ptr> errors(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          try {
            results[i].emplace(fn(i));
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

unsigned thread_count(unsigned requested) {
  return requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    app_.require_subcommand(1);
    app_.set_version_flag("--version", std::string(tool_version()));
    app_.footer("Exit codes: 0 success, 1 usage error, 2 data error.");
    app_.fallthrough();
    app_.set_config("--config", "", "read the subcommand's options from a TOML/INI file");
    app_.config_formatter(std::make_shared<SubcommandConfig>(app_));
    add_parse();
    add_stats();
    add_train();
    add_insert();
    add_eval();
    add_render();
    add_finetune_config();
    add_insert_remote();
    add_ttest();
    add_replay();
  }

  int run(std::span<const std::string> args) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app_.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e, out_, err_);
    } catch (const CLI::CallForAllHelp& e) {
      return app_.exit(e, out_, err_);
    } catch (const CLI::CallForVersion& e) {
      return app_.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      app_.exit(e, err_, err_);
      return kExitUsage;
    }
    for (auto& c : commands_) {
      if (!c->app->parsed()) continue;
      const std::string artifact = c->body();
      if (c->out.empty()) {
        out_ << artifact;
      } else {
        write_file(c->out, artifact);
        write_manifest(*c);
      }
    }
    return exit_code_;
  }

 private:
  Command& command(const std::string& name, const std::string& help) {
    auto c = std::make_unique<Command>();
    c->app = app_.add_subcommand(name, help);
    commands_.push_back(std::move(c));
    return *commands_.back();
  }

  void add_parse() {
    auto& c = command("parse", "validate an annotated corpus and convert it between formats");
    add_corpus_input(c, parse_.io);
    c.app->add_option("-t,--to", parse_.to, "output format")->check(CLI::IsMember(kFormats))->capture_default_str();
    add_out(c);
    c.body = [this] { return format_utterances(load(parse_.io.in, parse_.io.format), parse_.to); };
  }

  void add_stats() {
    auto& c = command("stats", "corpus statistics: sentences, average tokens, disfluency rates");
    add_corpus_input(c, stats_.io);
    c.app->add_flag("--json", stats_.json, "emit JSON instead of a table");
    add_out(c);
    c.body = [this] {
      const auto corpus = load(stats_.io.in, stats_.io.format);
      const auto set = build_pairs(corpus);
      const auto s = compute_stats(set.pairs);
      if (!stats_.json) return stats_table(s, set.dropped_empty);
      ordered_json doc;
      doc["n_sentences"] = s.n_sentences;
      doc["avg_tokens_fluent"] = s.avg_tokens_fluent;
      doc["avg_tokens_disfluent"] = s.avg_tokens_disfluent;
      doc["total_fluent_tokens"] = s.total_fluent_tokens;
      doc["total_disfluent_tokens"] = s.total_disfluent_tokens;
      doc["rate_micro"] = s.rate_micro;
      doc["rate_macro"] = s.rate_macro;
      doc["dropped_empty"] = set.dropped_empty;
      return doc.dump(2) + "\n";
    };
  }

  void add_train() {
    auto& c = command("train", "train an insertion model from an annotated corpus");
    add_corpus_input(c, train_.io);
    c.app->add_option("--test-fraction", train_.test_fraction, "hold out this fraction (trains on the rest)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    add_seed(c);
    add_out(c);
    c.body = [this, &c] {
      const auto corpus = load(train_.io.in, train_.io.format);
      auto set = build_pairs(corpus);
      std::vector<ParallelPair> train = std::move(set.pairs);
      if (train_.test_fraction > 0.0) {
        train = split_corpus<ParallelPair>(train, train_.test_fraction, c.seed).first;
      }
      if (set.dropped_empty > 0) err_ << "note: skipped " << set.dropped_empty << " utterance(s) with no fluent tokens\n";
      return dump_model(train_model(train));
    };
  }

  void add_insert() {
    auto& c = command("insert", "insert disfluencies into fluent text with a trained model");
    add_input(c, "-m,--model", insert_.model, "model JSON from `train`");
    add_input(c, "-i,--in", insert_.in, "fluent text, one utterance per line ('-' for stdin)");
    add_seed(c);
    insert_.rate_opt = c.app->add_option("-r,--target-rate", insert_.target_rate,
                                         "disfluent-token fraction to aim for (default: the model's trained rate)")
                           ->check(CLI::Range(0.0, kMaxTargetRate));
    c.app->add_option("--max-events", insert_.max_events, "events per utterance at most")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    std::vector<std::string> kinds;
    for (auto k : kAllEventKinds) kinds.emplace_back(to_string(k));
    c.app->add_option("--kinds", insert_.kinds, "allowed event kinds (default: all)")
        ->delimiter(',')
        ->check(CLI::IsMember(kinds));
    c.app->add_option("-j,--threads", insert_.threads, "worker threads (0: all cores); output does not depend on it")
        ->capture_default_str();
    c.app->add_option("-t,--to", insert_.to, "output format")->check(CLI::IsMember(kFormats))->capture_default_str();
    add_out(c);
    c.body = [this, &c] {
      const auto model = parse_model(read_file(insert_.model));
      const auto fluent = load_fluent(insert_.in);
      GenerationConfig cfg;
      cfg.seed = c.seed;
      cfg.target_rate = insert_.rate_opt->count() > 0 ? insert_.target_rate : model.trained_rate;
      cfg.max_events_per_utterance = insert_.max_events;
      if (!insert_.kinds.empty()) {
        cfg.allow_kinds.fill(false);
        for (const auto& k : insert_.kinds) cfg.allow_kinds[static_cast<std::size_t>(*event_kind_from_string(k))] = true;
      }
      const auto out = insert_batch(model, fluent, cfg, thread_count(insert_.threads));
      return format_utterances(out, insert_.to);
    };
  }

  void add_eval() {
    auto& c = command("eval", "score generated utterances against references");
    add_input(c, "--hyp", eval_.hyp, "generated corpus");
    add_input(c, "--ref", eval_.ref, "reference corpus");
    c.app->add_option("-f,--format", eval_.format, "format of both corpora (default: from extension)")
        ->check(CLI::IsMember(kFormats));
    add_input(c, "--hyp-emb", eval_.hyp_emb, "hypothesis token embeddings", false);
    add_input(c, "--ref-emb", eval_.ref_emb, "reference token embeddings", false);
    eval_.rate_opt = c.app->add_option("--reference-rate", eval_.reference_rate,
                                       "reference disfluency rate (default: micro rate of --ref)")
                         ->check(CLI::Range(0.0, 1.0));
    c.app->add_option("--max-n", eval_.max_n, "highest BLEU n-gram order")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_out(c);
    c.body = [this] {
      if (eval_.hyp_emb.empty() != eval_.ref_emb.empty()) {
        throw CLI::ValidationError("--hyp-emb and --ref-emb go together");
      }
      const auto hyp = load(eval_.hyp, eval_.format);
      const auto ref = load(eval_.ref, eval_.format);
      auto words = [](const std::vector<AnnotatedUtterance>& us) {
        std::vector<TokenList> out;
        for (const auto& u : us) {
          TokenList t;
          for (const auto& tok : u.tokens) t.push_back(tok.text);
          out.push_back(std::move(t));
        }
        return out;
      };
      double reference_rate = eval_.reference_rate;
      if (eval_.rate_opt->count() == 0) reference_rate = rate_report(ref, 0.0).rate_generated;
      auto report = rate_report(hyp, reference_rate);
      report.bleu = corpus_bleu(words(hyp), words(ref), eval_.max_n);
      if (!eval_.hyp_emb.empty()) {
        std::istringstream h(read_file(eval_.hyp_emb));
        std::istringstream r(read_file(eval_.ref_emb));
        report.bert = corpus_bert_score(read_embeddings(h), read_embeddings(r));
      }
      return report_to_json(report).dump(2) + "\n";
    };
  }

  void add_render() {
    auto& c = command("render", "render annotated utterances as TTS input text");
    add_corpus_input(c, render_.io);
    c.app->add_option("--pause-surface", render_.style.silent_pause_surface, "text for <sil>")
        ->capture_default_str();
    c.app->add_flag("--drop-fillers", render_.drop_fillers, "omit filled pauses");
    c.app->add_flag("--no-fragment-hyphen", render_.no_hyphen, "render 'b- birthday' as 'b birthday'");
    add_out(c);
    c.body = [this] {
      RenderStyle style = render_.style;
      style.keep_filler_tokens = !render_.drop_fillers;
      style.fragment_hyphen = !render_.no_hyphen;
      std::string out;
      for (const auto& u : load(render_.io.in, render_.io.format)) out += render_tts(u, style) + "\n";
      return out;
    };
  }

  void add_finetune_config() {
    auto& c = command("finetune-config", "export the LoRA fine-tuning configuration as JSON");
    c.app->add_option("--set", ft_.sets, "override a field: key=value (value parsed as JSON, else a string)");
    add_input(c, "--overrides", ft_.overrides_file, "JSON object of overrides (applied before --set)", false);
    add_out(c);
    c.body = [this] {
      nlohmann::json overrides = nlohmann::json::object();
      if (!ft_.overrides_file.empty()) {
        overrides = nlohmann::json::parse(read_file(ft_.overrides_file), nullptr, false);
        if (overrides.is_discarded()) throw FormatError(1, ft_.overrides_file + ": not JSON");
      }
      for (const auto& s : ft_.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set expects key=value, got '" + s + "'");
        const std::string raw = s.substr(eq + 1);
        auto value = nlohmann::json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        overrides[s.substr(0, eq)] = value;
      }
      return to_json(export_finetune_config(overrides)).dump(2) + "\n";
    };
  }

  void add_insert_remote() {
    auto& c = command("insert-remote", "insert disfluencies through a remote completion service");
    add_input(c, "-i,--in", remote_.in, "fluent text, one utterance per line");
    c.app->add_option("--endpoint", remote_.url, "completion URL (default: $" + std::string(kEndpointEnv) + ")");
    c.app->add_option("--timeout", remote_.timeout, "seconds per request")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c.app->add_option("--retries", remote_.retries, "retries on transport errors, 5xx and 429")
        ->capture_default_str();
    c.app->add_option("--max-in-flight", remote_.in_flight, "concurrent requests at most")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c.app->add_option("-j,--threads", remote_.threads, "worker threads")->capture_default_str();
    c.app->add_flag("--keep-rejected", remote_.keep_rejected,
                    "emit the fluent utterance unchanged when a completion is rejected");
    c.app->add_option("-t,--to", remote_.to, "output format")->check(CLI::IsMember(kFormats))->capture_default_str();
    add_out(c);
    c.body = [this] {
      RemoteEndpoint ep;
      if (remote_.url.empty()) {
        auto env = RemoteEndpoint::from_env();
        if (!env) throw CLI::ValidationError("no endpoint: pass --endpoint or set " + std::string(kEndpointEnv));
        ep = *env;
      } else {
        ep.base_url = remote_.url;
        if (auto env = RemoteEndpoint::from_env()) ep.bearer_token = env->bearer_token;
      }
      ep.timeout = std::chrono::duration<double>(remote_.timeout);
      ep.max_retries = remote_.retries;
      ep.max_in_flight = remote_.in_flight;
      const RemoteInserter client(ep);
      const auto fluent = load_fluent(remote_.in);
      std::mutex log;
      const auto out = parallel_map(fluent.size(), thread_count(remote_.threads), [&](std::size_t i) {
        try {
          return client.insert(fluent[i]);
        } catch (const RemoteError& e) {
          if (!remote_.keep_rejected || e.kind() != RemoteError::Kind::RoundTripViolation) throw;
          std::lock_guard lock(log);
          err_ << "warning: utterance " << i + 1 << " rejected: " << e.what() << '\n';
          return make_utterance(fluent[i], {});
        }
      });
      return format_utterances(out, remote_.to);
    };
  }

  void add_ttest() {
    auto& c = command("ttest", "two-sample t-test on two files of numbers");
    add_input(c, "--a", ttest_.a, "first sample (whitespace-separated numbers)");
    add_input(c, "--b", ttest_.b, "second sample");
    c.app->add_flag("--welch", ttest_.welch, "Welch's unequal-variance test instead of pooled");
    add_out(c);
    c.body = [this] {
      const auto a = read_numbers(ttest_.a);
      const auto b = read_numbers(ttest_.b);
      const auto r = two_sample_ttest(a, b, ttest_.welch ? TTestMethod::WelchT : TTestMethod::StudentT);
      ordered_json doc;
      doc["statistic"] = r.statistic;
      doc["degrees_of_freedom"] = r.degrees_of_freedom;
      doc["p_value"] = r.p_value;
      doc["method"] = r.method == TTestMethod::StudentT ? "student_t" : "welch_t";
      return doc.dump(2) + "\n";
    };
  }

  void add_replay() {
    replay_app_ = app_.add_subcommand("replay", "re-run the command recorded in a manifest and verify the output");
    replay_app_->add_option("manifest", replay_.manifest, "<out>.manifest.json")->required();
    replay_app_->add_option("-o,--out", replay_.out, "write to this path instead of the recorded one");
    replay_app_->add_flag("--no-check", replay_.no_check, "skip hash verification");
    replay_app_->callback([this] { exit_code_ = replay(); });
  }

  int replay() {
    const auto m = nlohmann::json::parse(read_file(replay_.manifest), nullptr, false);
    if (m.is_discarded() || !m.contains("command") || !m.contains("args") || !m.contains("outputs")) {
      throw FormatError(1, replay_.manifest + ": not a run manifest");
    }
    for (const auto& in : m.value("inputs", nlohmann::json::array())) {
      const auto path = in.at("path").get<std::string>();
      if (sha256_hex(read_file(path)) != in.at("sha256").get<std::string>()) {
        throw DataError("input changed since the manifest was written: " + path);
      }
    }
    std::vector<std::string> args{m.at("command").get<std::string>()};
    std::string out_path = m.at("outputs").at(0).at("path").get<std::string>();
    for (const auto& a : m.at("args")) {
      std::string s = a.get<std::string>();
      if (!replay_.out.empty() && s.rfind("--out=", 0) == 0) {
        s = "--out=" + replay_.out;
        out_path = replay_.out;
      }
      args.push_back(std::move(s));
    }
    Cli nested(out_, err_);
    if (const int rc = nested.run(args); rc != kExitOk) return rc;
    if (replay_.no_check) return kExitOk;
    const auto expected = m.at("outputs").at(0).at("sha256").get<std::string>();
    if (sha256_hex(read_file(out_path)) != expected) {
      err_ << "replay: " << out_path << " differs from the recorded output\n";
      return kExitData;
    }
    err_ << "replay: " << out_path << " matches the recorded output\n";
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"disfl: disfluency annotation, insertion and evaluation toolkit", "disfl"};
  std::vector<std::unique_ptr<Command>> commands_;
  CLI::App* replay_app_ = nullptr;
  int exit_code_ = kExitOk;

  struct {
    IoOpts io;
    std::string to = "jsonl";
  } parse_;
  struct {
    IoOpts io;
    bool json = false;
  } stats_;
  struct {
    IoOpts io;
    double test_fraction = 0.0;
  } train_;
  struct {
    std::string model, in, to = "markup";
    double target_rate = 0.0;
    const CLI::Option* rate_opt = nullptr;
    std::size_t max_events = 32;
    std::vector<std::string> kinds;
    unsigned threads = 1;
  } insert_;
  struct {
    std::string hyp, ref, format, hyp_emb, ref_emb;
    double reference_rate = 0.0;
    const CLI::Option* rate_opt = nullptr;
    std::size_t max_n = 4;
  } eval_;
  struct {
    IoOpts io;
    RenderStyle style;
    bool drop_fillers = false;
    bool no_hyphen = false;
  } render_;
  struct {
    std::vector<std::string> sets;
    std::string overrides_file;
  } ft_;
  struct {
    std::string in, url, to = "markup";
    double timeout = 30.0;
    std::size_t retries = 2;
    std::size_t in_flight = 4;
    unsigned threads = 4;
    bool keep_rejected = false;
  } remote_;
  struct {
    std::string a, b;
    bool welch = false;
  } ttest_;
  struct {
    std::string manifest, out;
    bool no_check = false;
  } replay_;
};

}  // namespace

std::string_view tool_version() { return DISFL_VERSION; }

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) hex << std::setw(2) << static_cast<int>(md[i]);
  return hex.str();
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  try {
    Cli cli(out, err);
    return cli.run(args);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidOverride& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace disfl::cli
