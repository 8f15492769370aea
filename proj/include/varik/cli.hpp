#pragma once

#include <map>
#include <string>
#include <vector>

namespace varik::cli {

/// Parsed structured-text problem file: [section] headers with key = value
/// lines; values are numbers, quoted strings, bare words, or (nested) lists.
/// Entry order inside a section is preserved (constants bind in file order).
struct ProblemFile {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    long integer_or(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> number_list(const std::string& section, const std::string& key) const;
    std::vector<std::string> string_list(const std::string& section, const std::string& key) const;
    std::vector<std::vector<double>> rect(const std::string& section, const std::string& key) const;
};

ProblemFile parse_problem_text(const std::string& text, const std::string& origin);

struct RunResult {
    int exit_code = 1;      // 0 pass, 2 check failed, 1 error
    std::string report;     // JSON report (also written to the output path)
    std::string error;      // non-empty on exit_code == 1
};

/// Runs a problem file (path or bundled name) with key=value overrides of the
/// form "section.key=value". Artifacts go to the [output] path.
RunResult run(const std::string& path_or_name, const std::vector<std::string>& overrides);

std::vector<std::string> list_builtins();
const std::string* builtin_text(const std::string& name);
std::string schema_text();

}  // namespace varik::cli
