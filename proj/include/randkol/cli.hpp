#pragma once

// Command-line front end. Subcommands:
//
//   generate   stream a directed sequence as letters or runs
//   density    single-trace checkpoints or Monte Carlo terminal density, CSV out
//   exact      closed form vs enumeration for P(X_n = lo)
//   snk        determination-partition class sizes (optionally every tuple)
//   correlate  centered-letter correlation, closed form vs enumeration
//   selfref    coupled self-referential construction trace, CSV out
//   verify     run the library's full invariant-check registry
//
// Exit codes: 0 success, 1 usage error, 2 domain error (bad values, closed
// form below validity), 3 resource limit (enumeration width, queue budget,
// file I/O), 4 verification check failure. All randomness flows from --seed
// (default 0); --threads 0 means RANDKOL_THREADS, then hardware concurrency.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "randkol/core.hpp"
#include "randkol/csv.hpp"
#include "randkol/errors.hpp"
#include "randkol/exact.hpp"
#include "randkol/sources.hpp"
#include "randkol/stats.hpp"
#include "randkol/types.hpp"
#include "randkol/verify.hpp"

namespace randkol::cli {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitResource = 3;
inline constexpr int kExitVerifyFailed = 4;

namespace detail {

using nlohmann::json;

// "a,b" -> ordered alphabet; first_listed keeps the written order for
// defaults that depend on it (markov start).
inline Alphabet parse_alphabet_pair(const std::string& text, Letter* first_listed) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  std::uint64_t a = 0, b = 0;
  auto [p1, e1] = std::from_chars(begin, end, a);
  if (e1 != std::errc{} || p1 == end || *p1 != ',') {
    throw DomainError("alphabet must be two comma-separated letters, e.g. 1,2");
  }
  auto [p2, e2] = std::from_chars(p1 + 1, end, b);
  if (e2 != std::errc{} || p2 != end) {
    throw DomainError("alphabet must be two comma-separated letters, e.g. 1,2");
  }
  const Letter la{a}, lb{b};
  if (la == lb) throw DomainError("alphabet letters must differ");
  if (first_listed) *first_listed = la;
  return Alphabet(std::min(la, lb), std::max(la, lb));
}

inline std::string format_g12(double v) { return format_density(v); }

// Renders a value that is NaN-when-undefined (division by a zero density).
inline std::string format_or_undefined(double v) {
  return std::isnan(v) ? std::string("undefined") : format_g12(v);
}

inline json json_header(std::string_view command) {
  json j;
  j["command"] = std::string(command);
  j["version"] = std::string(kVersion);
  return j;
}

inline json trace_rows(const DensityTrace& trace) {
  json rows = json::array();
  for (const TraceCheckpoint& cp : trace.checkpoints) {
    rows.push_back({{"position", cp.position},
                    {"count_lo", cp.count_lo},
                    {"count_hi", cp.count_hi},
                    {"density_lo", cp.density_lo}});
  }
  return rows;
}

struct GenerateArgs {
  std::string spec_text;
  std::uint64_t length = 0;
  std::uint64_t seed = 0;
  bool letters = false;
  bool runs = false;
  bool as_json = false;
};

inline int run_generate(const GenerateArgs& args, std::ostream& out) {
  const SourceSpec spec = parse_spec(args.spec_text);
  DirectedStream<SourceState> stream{SourceState(spec, Seed{args.seed})};
  if (args.runs) {
    json rows = json::array();
    std::string buffer;
    std::optional<Letter> run_letter;
    std::uint64_t run_length = 0;
    auto emit = [&] {
      if (args.as_json) {
        rows.push_back({{"letter", run_letter->value()}, {"length", run_length}});
      } else {
        buffer += std::to_string(run_letter->value());
        buffer += ',';
        buffer += std::to_string(run_length);
        buffer += '\n';
        if (buffer.size() >= 65536) {
          out << buffer;
          buffer.clear();
        }
      }
    };
    for (std::uint64_t i = 0; i < args.length; ++i) {
      const Letter x = *stream.next();
      if (run_letter && x == *run_letter) {
        ++run_length;
      } else {
        if (run_letter) emit();
        run_letter = x;
        run_length = 1;
      }
    }
    if (run_letter) emit();
    if (args.as_json) {
      json j = json_header("generate");
      j["spec"] = spec.to_string();
      j["seed"] = args.seed;
      j["length"] = args.length;
      j["runs"] = std::move(rows);
      out << j.dump(2) << '\n';
    } else {
      out << buffer;
    }
    return kExitSuccess;
  }
  // Letter mode: a contiguous digit string when both alphabet letters are
  // single-digit, comma-separated values otherwise.
  const Alphabet alpha = spec.alphabet();
  const bool digits = alpha.hi().value() <= 9;
  std::string buffer;
  for (std::uint64_t i = 0; i < args.length; ++i) {
    const Letter x = *stream.next();
    if (digits) {
      buffer += static_cast<char>('0' + x.value());
    } else {
      if (i > 0) buffer += ',';
      buffer += std::to_string(x.value());
    }
    if (!args.as_json && buffer.size() >= 65536) {
      out << buffer;
      buffer.clear();
    }
  }
  if (args.as_json) {
    json j = json_header("generate");
    j["spec"] = spec.to_string();
    j["seed"] = args.seed;
    j["length"] = args.length;
    j["letters"] = std::move(buffer);
    out << j.dump(2) << '\n';
  } else {
    out << buffer << '\n';
  }
  return kExitSuccess;
}

struct DensityArgs {
  std::string spec_text;
  std::uint64_t length = 0;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string csv_path;
  bool as_json = false;
};

inline int run_density(const DensityArgs& args, std::ostream& out) {
  const SourceSpec spec = parse_spec(args.spec_text);
  if (args.trials <= 1) {
    const auto cps = default_checkpoints(args.length);
    const DensityTrace trace = density_trace(spec, args.length, cps, Seed{args.seed});
    write_csv_file(args.csv_path, trace);
    const TraceCheckpoint& last = trace.checkpoints.back();
    if (args.as_json) {
      json j = json_header("density");
      j["spec"] = spec.to_string();
      j["seed"] = args.seed;
      j["length"] = args.length;
      j["trials"] = 1;
      j["csv"] = args.csv_path;
      j["final_density"] = last.density_lo;
      j["rows"] = trace_rows(trace);
      out << j.dump(2) << '\n';
    } else {
      out << "rows=" << trace.checkpoints.size()
          << " final_density=" << format_g12(last.density_lo) << '\n';
    }
    return kExitSuccess;
  }
  const unsigned threads = resolve_threads(args.threads);
  std::vector<std::uint64_t> counts;
  const MCResult result =
      mc_density(spec, args.length, args.trials, Seed{args.seed}, threads, &counts);
  DensityTrace per_trial;  // one terminal row per trial, in trial order
  per_trial.checkpoints.reserve(counts.size());
  for (std::uint64_t c : counts) {
    per_trial.checkpoints.push_back(
        TraceCheckpoint{args.length, c, args.length - c,
                        static_cast<double>(c) / static_cast<double>(args.length)});
  }
  write_csv_file(args.csv_path, per_trial);
  if (args.as_json) {
    json j = json_header("density");
    j["spec"] = spec.to_string();
    j["seed"] = args.seed;
    j["length"] = args.length;
    j["trials"] = args.trials;
    j["threads"] = threads;
    j["csv"] = args.csv_path;
    j["mean"] = result.mean;
    j["std_error"] = result.std_error;
    j["rows"] = trace_rows(per_trial);
    out << j.dump(2) << '\n';
  } else {
    out << "trials=" << result.trials << " mean=" << format_g12(result.mean)
        << " std_error=" << format_g12(result.std_error) << " seed=" << args.seed
        << '\n';
  }
  return kExitSuccess;
}

struct ExactArgs {
  std::string mode;
  double p = 0.0;
  std::string alphabet_text;
  std::uint64_t n = 0;
  std::uint64_t start = 0;  // 0 = first listed alphabet letter
  bool force_oracle = false;
  bool as_json = false;
};

inline int run_exact(const ExactArgs& args, std::ostream& out) {
  Letter first_listed = Letter::unchecked(1);
  const Alphabet alpha = parse_alphabet_pair(args.alphabet_text, &first_listed);
  const Probability p{args.p};
  json j = json_header("exact");
  j["mode"] = args.mode;
  j["p"] = args.p;
  j["alphabet"] = args.alphabet_text;
  j["n"] = args.n;
  if (args.mode == "markov") {
    const Letter start = args.start == 0 ? first_listed : Letter{args.start};
    const double oracle =
        markov_xn_enum(p, static_cast<unsigned>(args.n), alpha, start);
    if (args.as_json) {
      j["start"] = start.value();
      j["oracle"] = oracle;
      out << j.dump(2) << '\n';
    } else {
      out << "oracle=" << format_g12(oracle) << '\n';
    }
    return kExitSuccess;
  }
  const double closed = p_xn_closed(p, args.n, alpha);
  std::optional<double> oracle;
  if (args.force_oracle || args.n <= kMaxEnumN) {
    oracle = p_xn_enum(p, static_cast<unsigned>(args.n), alpha, alpha.lo());
  }
  if (args.as_json) {
    j["closed"] = closed;
    if (oracle) j["oracle"] = *oracle;
    out << j.dump(2) << '\n';
  } else {
    out << "closed=" << format_g12(closed);
    if (oracle) out << " oracle=" << format_g12(*oracle);
    out << '\n';
  }
  return kExitSuccess;
}

struct SnkArgs {
  std::uint64_t n = 0;
  bool list = false;
  bool as_json = false;
};

inline int run_snk(const SnkArgs& args, std::ostream& out) {
  const unsigned n = static_cast<unsigned>(args.n);
  if (args.list) {
    if (args.n > 16) {
      throw ResourceLimitError("snk --list is capped at n <= 16");
    }
    json rows = json::array();
    std::uint8_t t[kMaxEnumN];
    const std::uint64_t end = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < end; ++mask) {
      std::string tuple;
      for (unsigned i = 0; i < n; ++i) {
        t[i] = ((mask >> (n - 1 - i)) & 1) ? 2 : 1;
        if (i > 0) tuple += ',';
        tuple += static_cast<char>('0' + t[i]);
      }
      const unsigned k = randkol::detail::determination_step(t, n);
      if (args.as_json) {
        rows.push_back({{"tuple", tuple}, {"k", k}});
      } else {
        out << tuple << " -> " << k << '\n';
      }
    }
    if (args.as_json) {
      json j = json_header("snk");
      j["n"] = args.n;
      j["tuples"] = std::move(rows);
      out << j.dump(2) << '\n';
    }
    return kExitSuccess;
  }
  const SnkTable table = snk_partition(n);
  if (args.as_json) {
    json j = json_header("snk");
    j["n"] = args.n;
    json sizes = json::array();
    for (unsigned k = 1; k <= n; ++k) sizes.push_back(table.sizes[k]);
    j["sizes"] = std::move(sizes);
    j["total"] = table.total();
    out << j.dump(2) << '\n';
  } else {
    for (unsigned k = 1; k <= n; ++k) {
      out << "k=" << k << " size=" << table.sizes[k] << '\n';
    }
    out << "total=" << table.total() << '\n';
  }
  return kExitSuccess;
}

struct CorrelateArgs {
  double p = 0.0;
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  bool force_oracle = false;
  bool as_json = false;
};

inline int run_correlate(const CorrelateArgs& args, std::ostream& out) {
  const Probability p{args.p};
  const double closed =
      corr_closed(p, static_cast<unsigned>(args.m), static_cast<unsigned>(args.n));
  std::optional<double> oracle;
  if (args.force_oracle || args.n <= kMaxEnumN) {
    oracle = corr_enum(p, static_cast<unsigned>(args.m), static_cast<unsigned>(args.n));
  }
  if (args.as_json) {
    json j = json_header("correlate");
    j["p"] = args.p;
    j["m"] = args.m;
    j["n"] = args.n;
    j["closed"] = closed;
    if (oracle) j["oracle"] = *oracle;
    out << j.dump(2) << '\n';
  } else {
    out << "closed=" << format_g12(closed);
    if (oracle) out << " oracle=" << format_g12(*oracle);
    out << '\n';
  }
  return kExitSuccess;
}

struct SelfRefArgs {
  std::uint64_t length = 0;
  std::string csv_path;
  bool as_json = false;
};

inline int run_selfref(const SelfRefArgs& args, std::ostream& out) {
  // CSV: the directed stream's first `length` letters, like `density` on the
  // selfref source. Summary: the coupled pair after `length` directing steps.
  const auto cps = default_checkpoints(args.length);
  const DensityTrace trace =
      density_trace(SourceSpec::selfref(), args.length, cps, Seed{0});
  write_csv_file(args.csv_path, trace);
  const SelfRefDensities d = selfref_densities(args.length);
  if (args.as_json) {
    json j = json_header("selfref");
    j["length"] = args.length;
    j["csv"] = args.csv_path;
    j["t_density1"] = d.t_density1;
    j["o_density1"] = d.o_density1;
    j["growth_residual"] =
        std::isnan(d.growth_residual) ? json() : json(d.growth_residual);
    j["balance_residual"] = d.balance_residual;
    j["rows"] = trace_rows(trace);
    out << j.dump(2) << '\n';
  } else {
    out << "t_density1=" << format_g12(d.t_density1)
        << " o_density1=" << format_g12(d.o_density1)
        << " growth_residual=" << format_or_undefined(d.growth_residual)
        << " balance_residual=" << format_g12(d.balance_residual) << '\n';
  }
  return kExitSuccess;
}

struct VerifyArgs {
  bool fast = false;
  unsigned threads = 0;
  bool as_json = false;
};

inline int run_verify_cmd(const VerifyArgs& args, std::ostream& out) {
  VerifyOptions options;
  options.fast = args.fast;
  options.threads = resolve_threads(args.threads);
  if (args.as_json) {
    std::ostringstream sink;
    const VerifyReport report = run_verify(options, sink);
    json j = json_header("verify");
    j["fast"] = args.fast;
    j["failures"] = report.failures;
    j["seconds"] = report.seconds;
    json checks = json::array();
    for (const CheckResult& r : report.results) {
      checks.push_back({{"name", r.name},
                        {"passed", r.passed},
                        {"detail", r.detail},
                        {"seconds", r.seconds}});
    }
    j["checks"] = std::move(checks);
    out << j.dump(2) << '\n';
    return report.failures == 0 ? kExitSuccess : kExitVerifyFailed;
  }
  const VerifyReport report = run_verify(options, out);
  return report.failures == 0 ? kExitSuccess : kExitVerifyFailed;
}

}  // namespace detail

// Parses and executes one command line. `argv[0]` is the program name.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Directed-sequence laboratory: generate run-length directed "
               "sequences, compare closed-form letter probabilities with "
               "enumeration oracles, and estimate densities by seeded "
               "Monte Carlo."};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  detail::GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "Stream a directed sequence");
  c_gen->add_option("--spec", gen.spec_text,
                    "Source descriptor: periodic:<digits>, classic:<a>,<b>, "
                    "iid:p=<p>,a=<a>,b=<b>, markov:p=<p>,a=<a>,b=<b>[,start=<s>], "
                    "selfref")
      ->required();
  c_gen->add_option("--length", gen.length, "Letters to emit")
      ->required()
      ->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", gen.seed, "PRNG seed (default 0)");
  CLI::Option* letters_flag =
      c_gen->add_flag("--letters", gen.letters, "Print letters (default)");
  c_gen->add_flag("--runs", gen.runs, "Print letter,length run pairs")
      ->excludes(letters_flag);
  c_gen->add_flag("--json", gen.as_json, "JSON output");

  detail::DensityArgs den;
  CLI::App* c_den = app.add_subcommand("density", "Density trace or Monte Carlo");
  c_den->add_option("--spec", den.spec_text, "Source descriptor")->required();
  c_den->add_option("--length", den.length, "Letters per realization")
      ->required()
      ->check(CLI::PositiveNumber);
  c_den->add_option("--trials", den.trials, "Independent realizations (default 1)")
      ->check(CLI::PositiveNumber);
  c_den->add_option("--seed", den.seed, "PRNG seed (default 0)");
  c_den->add_option("--threads", den.threads,
                    "Worker threads; 0 = RANDKOL_THREADS or hardware");
  c_den->add_option("--csv", den.csv_path, "Output CSV path")->required();
  c_den->add_flag("--json", den.as_json, "JSON output");

  detail::ExactArgs exa;
  CLI::App* c_exa = app.add_subcommand("exact", "Exact P(X_n = lo)");
  c_exa->add_option("--mode", exa.mode, "iid or markov")
      ->required()
      ->check(CLI::IsMember({"iid", "markov"}));
  c_exa->add_option("--p", exa.p, "Lo-letter probability (iid) or flip probability "
                                  "(markov)")
      ->required();
  c_exa->add_option("--alphabet", exa.alphabet_text, "Two letters, e.g. 1,2")
      ->required();
  c_exa->add_option("--n", exa.n, "Position")->required()->check(CLI::PositiveNumber);
  c_exa->add_option("--start", exa.start,
                    "Markov start letter (default: first alphabet letter)");
  c_exa->add_flag("--oracle", exa.force_oracle,
                  "Force the enumeration oracle (auto for n <= 24)");
  c_exa->add_flag("--json", exa.as_json, "JSON output");

  detail::SnkArgs snk;
  CLI::App* c_snk = app.add_subcommand("snk", "Determination partition of {1,2}^n");
  c_snk->add_option("--n", snk.n, "Tuple length")->required()->check(CLI::PositiveNumber);
  c_snk->add_flag("--list", snk.list, "List every tuple with its class (n <= 16)");
  c_snk->add_flag("--json", snk.as_json, "JSON output");

  detail::CorrelateArgs cor;
  CLI::App* c_cor = app.add_subcommand("correlate", "Centered-letter correlation");
  c_cor->add_option("--p", cor.p, "Lo-letter probability")->required();
  c_cor->add_option("--m", cor.m, "First position")->required()->check(CLI::PositiveNumber);
  c_cor->add_option("--n", cor.n, "Second position (n >= m+2)")
      ->required()
      ->check(CLI::PositiveNumber);
  c_cor->add_flag("--oracle", cor.force_oracle,
                  "Force the enumeration oracle (auto for n <= 24)");
  c_cor->add_flag("--json", cor.as_json, "JSON output");

  detail::SelfRefArgs sref;
  CLI::App* c_sref = app.add_subcommand("selfref", "Self-referential construction");
  c_sref->add_option("--length", sref.length, "Directed letters to trace")
      ->required()
      ->check(CLI::PositiveNumber);
  c_sref->add_option("--csv", sref.csv_path, "Output CSV path")->required();
  c_sref->add_flag("--json", sref.as_json, "JSON output");

  detail::VerifyArgs ver;
  CLI::App* c_ver = app.add_subcommand("verify", "Run the invariant-check registry");
  c_ver->add_flag("--fast", ver.fast, "Reduced sample sizes");
  c_ver->add_option("--threads", ver.threads,
                    "Worker threads; 0 = RANDKOL_THREADS or hardware");
  c_ver->add_flag("--json", ver.as_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  try {
    if (app.got_subcommand(c_gen)) return detail::run_generate(gen, out);
    if (app.got_subcommand(c_den)) return detail::run_density(den, out);
    if (app.got_subcommand(c_exa)) return detail::run_exact(exa, out);
    if (app.got_subcommand(c_snk)) return detail::run_snk(snk, out);
    if (app.got_subcommand(c_cor)) return detail::run_correlate(cor, out);
    if (app.got_subcommand(c_sref)) return detail::run_selfref(sref, out);
    if (app.got_subcommand(c_ver)) return detail::run_verify_cmd(ver, out);
  } catch (const ResourceLimitError& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const DomainError& e) {  // includes ParseError and OutOfRangeError
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitResource;
  }
  return kExitUsage;  // unreachable: a subcommand is required
}

// Convenience overload for tests: tokenized arguments without argv[0].
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("randkol");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(storage.size());
  for (const std::string& s : storage) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

inline int run_main(int argc, char** argv) {
  return run(argc, argv, std::cout, std::cerr);
}

}  // namespace randkol::cli
