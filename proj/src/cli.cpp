#include "tableq/cli.hpp"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tableq/compiler.hpp"
#include "tableq/discover.hpp"
#include "tableq/docs.hpp"
#include "tableq/graph.hpp"
#include "tableq/runs.hpp"

namespace tableq::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kUsage =
    "usage: tableq <command> [options]\n"
    "\n"
    "commands:\n"
    "  compile <module.xl...> [--layout FILE] [-o OUT.cells]\n"
    "  list    <IN.cells> [-o OUT]\n"
    "  runs    <IN.cells> [-o OUT.runs]\n"
    "  expand  <IN.runs> [-o OUT.cells]\n"
    "  rename  <IN.cells|IN.runs> --names FILE [-o OUT.xl]\n"
    "  graph   <IN.cells> [--no-counts] [-o OUT.dot]\n"
    "  tangle  <IN.lit> [-o OUT]\n"
    "  weave   <IN.lit> [-o OUT.html]\n"
    "  docset  <SRCDIR> -o SITEDIR\n"
    "\n"
    "'-' names standard input or output. Exit status: 0 success, 1 input\n"
    "error, 2 usage error.\n";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> inputs;
  std::string output;  // empty or "-": standard output
  std::string layout;
  std::string names;
  bool no_counts = false;
  bool from_runs = false;
};

Options parse_options(const std::vector<std::string>& args, size_t first) {
  Options opts;
  for (size_t i = first; i < args.size(); ++i) {
    const std::string& arg = args[i];
    auto value = [&](const char* flag) -> const std::string& {
      if (i + 1 >= args.size()) throw UsageError(std::string(flag) + " needs a value");
      return args[++i];
    };
    if (arg == "-o" || arg == "--output") {
      opts.output = value("-o");
    } else if (arg == "--layout") {
      opts.layout = value("--layout");
    } else if (arg == "--names") {
      opts.names = value("--names");
    } else if (arg == "--no-counts") {
      opts.no_counts = true;
    } else if (arg == "--runs") {
      opts.from_runs = true;
    } else if (arg.size() > 1 && arg[0] == '-' && arg != "-") {
      throw UsageError("unknown option '" + arg + "'");
    } else {
      opts.inputs.push_back(arg);
    }
  }
  return opts;
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream text;
    text << in.rdbuf();
    return std::move(text).str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) fail({}, "cannot open file '" + path + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return std::move(text).str();
}

// Write-to-temp-then-rename so a failure never leaves a partial file.
void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    out.flush();
    return;
  }
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) fail({}, "cannot write '" + tmp.string() + "'");
    file << content;
    if (!file.good()) fail({}, "error while writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string display_name(const std::string& path) { return path == "-" ? "<stdin>" : path; }

cells::Workbook read_workbook(const std::string& path, std::istream& in) {
  return cells::parse_workbook(read_input(path, in), display_name(path));
}

const std::string& one_input(const Options& opts, const char* what) {
  if (opts.inputs.size() != 1)
    throw UsageError(std::string(what) + " takes exactly one input");
  return opts.inputs.front();
}

// --- Subcommands ------------------------------------------------------------------

int cmd_compile(const Options& opts, std::istream& in, std::ostream& out) {
  if (opts.inputs.empty()) throw UsageError("compile needs at least one module file");
  dsl::ModuleAst merged;
  std::vector<std::string> file_inputs;
  for (const auto& input : opts.inputs) {
    if (input == "-") {
      dsl::ModuleAst m = dsl::parse_module(read_input(input, in), "<stdin>");
      std::vector<std::string> uses = m.uses;
      compiler::merge_into(merged, std::move(m));
      // includes from standard input resolve against the working directory
      compiler::merge_into(merged, compiler::load_modules(uses));
    } else {
      file_inputs.push_back(input);
    }
  }
  if (!opts.layout.empty()) file_inputs.push_back(opts.layout);
  compiler::merge_into(merged, compiler::load_modules(file_inputs));
  cells::Workbook wb = compiler::compile(merged);
  write_output(opts.output, serialize_workbook(wb), out);
  return 0;
}

int cmd_list(const Options& opts, std::istream& in, std::ostream& out) {
  cells::Workbook wb = read_workbook(one_input(opts, "list"), in);
  write_output(opts.output, runs::list_workbook(wb), out);
  return 0;
}

int cmd_runs(const Options& opts, std::istream& in, std::ostream& out) {
  cells::Workbook wb = read_workbook(one_input(opts, "runs"), in);
  write_output(opts.output, runs::serialize_run_listing(runs::detect_runs(wb)), out);
  return 0;
}

int cmd_expand(const Options& opts, std::istream& in, std::ostream& out) {
  const std::string& input = one_input(opts, "expand");
  dsl::RunListing listing = dsl::parse_run_listing(read_input(input, in), display_name(input));
  write_output(opts.output, serialize_workbook(runs::expand_runs(listing)), out);
  return 0;
}

int cmd_rename(const Options& opts, std::istream& in, std::ostream& out) {
  if (opts.names.empty()) throw UsageError("rename needs --names FILE");
  const std::string& input = one_input(opts, "rename");
  cells::Workbook wb;
  bool runs_input = opts.from_runs || fs::path(input).extension() == ".runs";
  if (runs_input) {
    dsl::RunListing listing = dsl::parse_run_listing(read_input(input, in), display_name(input));
    wb = runs::expand_runs(listing);
  } else {
    wb = read_workbook(input, in);
  }
  discover::NamingMap map = discover::parse_naming_map(read_input(opts.names, in), opts.names);
  discover::NamedEquationSet named = discover::rename(wb, map);
  write_output(opts.output, discover::print_named_set(named), out);
  return 0;
}

int cmd_graph(const Options& opts, std::istream& in, std::ostream& out) {
  cells::Workbook wb = read_workbook(one_input(opts, "graph"), in);
  std::string dot = graph::emit_dot(graph::sheet_deps(wb), !opts.no_counts);
  write_output(opts.output, dot, out);
  return 0;
}

int cmd_tangle(const Options& opts, std::istream& in, std::ostream& out) {
  write_output(opts.output, docs::tangle(read_input(one_input(opts, "tangle"), in)), out);
  return 0;
}

int cmd_weave(const Options& opts, std::istream& in, std::ostream& out) {
  const std::string& input = one_input(opts, "weave");
  std::string title = input == "-" ? "document" : fs::path(input).stem().string();
  write_output(opts.output, docs::weave(read_input(input, in), title), out);
  return 0;
}

int cmd_docset(const Options& opts, std::istream&, std::ostream&) {
  if (opts.output.empty() || opts.output == "-")
    throw UsageError("docset needs -o SITEDIR");
  docs::Site site = docs::build_docset(docs::load_pages(one_input(opts, "docset")));
  docs::write_site(site, opts.output);
  return 0;
}

bool color_enabled(const std::ostream& err) {
  if (std::getenv("NO_COLOR")) return false;
  return &err == &std::cerr && isatty(fileno(stderr));
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  bool color = color_enabled(err);
  auto error_tag = [&]() { return color ? "\x1b[31merror:\x1b[0m " : "error: "; };

  if (args.empty()) {
    err << kUsage;
    return 2;
  }
  const std::string& command = args[0];
  try {
    Options opts = parse_options(args, 1);
    if (command == "compile") return cmd_compile(opts, in, out);
    if (command == "list") return cmd_list(opts, in, out);
    if (command == "runs") return cmd_runs(opts, in, out);
    if (command == "expand") return cmd_expand(opts, in, out);
    if (command == "rename") return cmd_rename(opts, in, out);
    if (command == "graph") return cmd_graph(opts, in, out);
    if (command == "tangle") return cmd_tangle(opts, in, out);
    if (command == "weave") return cmd_weave(opts, in, out);
    if (command == "docset") return cmd_docset(opts, in, out);
    if (command == "--help" || command == "help") {
      out << kUsage;
      return 0;
    }
    throw UsageError("unknown command '" + command + "'");
  } catch (const UsageError& e) {
    err << error_tag() << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const Error& e) {
    if (e.where().known() || !e.where().file.empty())
      err << to_string(e.where()) << ": " << error_tag() << e.message() << "\n";
    else
      err << error_tag() << e.message() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_tag() << e.what() << "\n";
    return 1;
  }
}

}  // namespace tableq::cli
