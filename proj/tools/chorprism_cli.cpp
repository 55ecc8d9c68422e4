// Command-line driver. Talks to the library only through the C API.
//
// Exit codes: 0 success, 1 semantic or verification failure, 2 parse, I/O or
// usage error, 3 state budget exceeded.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chorprism/chorprism.h"

namespace {

struct Settings {
  std::string input;
  std::string output;
  std::string model;
  std::string style = "folded";
  std::string side = "chor";
  std::string format = "text";
  std::vector<std::string> consts;
  std::vector<std::string> inits;
  std::size_t max_states = 0;
  long long seed = -1;
  long long fault = -1;
  bool override_sconn = false;
  bool summary_only = false;
};

int exit_code(cp_status st) {
  switch (st) {
    case CP_OK: return 0;
    case CP_ERR_SYNTAX: case CP_ERR_IO: case CP_ERR_INVALID_ARGUMENT: return 2;
    case CP_ERR_BUDGET: return 3;
    default: return 1;
  }
}

int report_failure(cp_status st) {
  const std::string kind = cp_last_error_kind();
  const std::string msg = cp_last_error();
  std::cerr << "error: " << (msg.rfind(kind, 0) == 0 ? "" : kind + ": ") << msg << "\n";
  return exit_code(st);
}

struct Owned {
  char* p = nullptr;
  ~Owned() { cp_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using OptionsPtr = std::unique_ptr<cp_options, decltype(&cp_options_free)>;
using ProgramPtr = std::unique_ptr<cp_program, decltype(&cp_program_free)>;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

cp_status build_options(const Settings& s, cp_options* o) {
  cp_status st = CP_OK;
  if (!s.model.empty() && (st = cp_options_set_model(o, s.model.c_str())) != CP_OK) return st;
  if (s.seed >= 0 && (st = cp_options_set_seed(o, static_cast<uint64_t>(s.seed))) != CP_OK) return st;
  if ((st = cp_options_set_style(o, s.style.c_str())) != CP_OK) return st;
  if ((st = cp_options_set_override_sconn(o, s.override_sconn)) != CP_OK) return st;
  if (s.max_states > 0 && (st = cp_options_set_max_states(o, s.max_states)) != CP_OK) return st;
  if (s.fault >= 0 && (st = cp_options_set_fault(o, static_cast<size_t>(s.fault))) != CP_OK) return st;
  for (const auto& c : s.consts) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --const expects name=value, got '" << c << "'\n";
      return CP_ERR_INVALID_ARGUMENT;
    }
    double v = 0;
    try {
      std::size_t used = 0;
      v = std::stod(c.substr(eq + 1), &used);
      if (used != c.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      std::cerr << "error: --const value for '" << c.substr(0, eq) << "' is not a number\n";
      return CP_ERR_INVALID_ARGUMENT;
    }
    if ((st = cp_options_set_const(o, c.substr(0, eq).c_str(), v)) != CP_OK) return st;
  }
  for (const auto& group : s.inits)
    for (const auto& item : split(group, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --init expects var=value, got '" << item << "'\n";
        return CP_ERR_INVALID_ARGUMENT;
      }
      if ((st = cp_options_set_init(o, item.substr(0, eq).c_str(), item.substr(eq + 1).c_str())) != CP_OK) return st;
    }
  return CP_OK;
}

bool write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

int run(const std::string& cmd, const Settings& s) {
  OptionsPtr opts(cp_options_new(), &cp_options_free);
  if (cp_status st = build_options(s, opts.get()); st != CP_OK) {
    if (*cp_last_error()) return report_failure(st);
    return exit_code(st);
  }
  cp_program* raw = nullptr;
  if (cp_status st = cp_program_load_file(s.input.c_str(), opts.get(), &raw); st != CP_OK) return report_failure(st);
  ProgramPtr prog(raw, &cp_program_free);

  if (cmd == "check") {
    Owned report;
    const cp_status st = cp_check(prog.get(), opts.get(), &report.p);
    std::cout << report.str();
    if (st != CP_OK && !report.p) return report_failure(st);
    return exit_code(st);
  }
  if (cmd == "compile") {
    Owned text, summary;
    const cp_status st = cp_compile(prog.get(), opts.get(), &text.p, &summary.p);
    if (st != CP_OK) return report_failure(st);
    if (!write_output(s.output, text.str())) return 2;
    (s.output.empty() ? std::cerr : std::cout) << summary.str();
    return 0;
  }
  if (cmd == "chain") {
    Owned text;
    const cp_status st = cp_chain(prog.get(), opts.get(), s.side.c_str(), s.format.c_str(), &text.p);
    if (st != CP_OK) return report_failure(st);
    return write_output(s.output, text.str()) ? 0 : 2;
  }
  int equivalent = 0;
  Owned report, summary;
  const cp_status st = cp_verify(prog.get(), opts.get(), &equivalent, &report.p, &summary.p);
  if (st != CP_OK) return report_failure(st);
  if (!write_output(s.output, s.summary_only ? summary.str() : report.str() + summary.str())) return 2;
  return equivalent ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile probabilistic choreographies to PRISM and check the projection"};
  app.require_subcommand(1);
  Settings s;

  auto common = [&](CLI::App* sub) {
    sub->add_option("input", s.input, "choreography source (.chor)")->required()->check(CLI::ExistingFile);
    sub->add_option("--model", s.model, "override the model kind")->check(CLI::IsMember({"ctmc", "dtmc"}));
    sub->add_option("--const", s.consts, "define or override a constant (name=value)");
    sub->add_option("--seed", s.seed, "random 5-letter annotations from this seed")->check(CLI::NonNegativeNumber);
  };
  auto projecting = [&](CLI::App* sub) {
    sub->add_option("--style", s.style, "projection style")->check(CLI::IsMember({"folded", "formal"}));
    sub->add_flag("--override-sconn", s.override_sconn, "project programs that are not strongly connected");
    sub->add_option("--inject-fault", s.fault, "test hook: corrupt the n-th counter assignment")
        ->check(CLI::NonNegativeNumber);
  };
  auto exploring = [&](CLI::App* sub) {
    sub->add_option("--max-states", s.max_states, "state budget")->check(CLI::PositiveNumber);
    sub->add_option("--init", s.inits, "initial value overrides, e.g. x=0,y=1");
  };

  CLI::App* check = app.add_subcommand("check", "run the static checks");
  common(check);

  CLI::App* compile = app.add_subcommand("compile", "emit PRISM source");
  common(compile);
  projecting(compile);
  compile->add_option("-o,--output", s.output, "output file (default: stdout)");

  CLI::App* chain = app.add_subcommand("chain", "print the Markov chain of either side");
  common(chain);
  projecting(chain);
  exploring(chain);
  chain->add_option("--side", s.side, "chor or prism")->check(CLI::IsMember({"chor", "prism"}));
  chain->add_option("--format", s.format, "text or dot")->check(CLI::IsMember({"text", "dot"}));
  chain->add_option("-o,--output", s.output, "output file (default: stdout)");

  CLI::App* verify = app.add_subcommand("verify", "check the projection against the choreography");
  common(verify);
  projecting(verify);
  exploring(verify);
  verify->add_flag("--summary", s.summary_only, "print only key=value lines");
  verify->add_option("-o,--output", s.output, "report file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  for (auto* sub : {check, compile, chain, verify})
    if (sub->parsed()) return run(sub->get_name(), s);
  return 2;
}
