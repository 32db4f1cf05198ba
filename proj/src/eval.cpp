#include "coderag/eval.hpp"

#include "coderag/errors.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace fs = std::filesystem;
using nlohmann::json;

namespace coderag {

const char* to_string(Category category) {
    switch (category) {
    case Category::configuration: return "configuration";
    case Category::core_primitives: return "core_primitives";
    case Category::advanced_simulation: return "advanced_simulation";
    case Category::algorithmic: return "algorithmic";
    case Category::debugging: return "debugging";
    }
    return "configuration";
}

Category category_from_string(const std::string& name) {
    if (name == "configuration") return Category::configuration;
    if (name == "core_primitives") return Category::core_primitives;
    if (name == "advanced_simulation") return Category::advanced_simulation;
    if (name == "algorithmic") return Category::algorithmic;
    if (name == "debugging") return Category::debugging;
    throw EvalError("unknown benchmark category: " + name);
}

const char* to_string(OutputKind kind) {
    switch (kind) {
    case OutputKind::scalar: return "scalar";
    case OutputKind::vector: return "vector";
    case OutputKind::text: return "text";
    }
    return "scalar";
}

OutputKind output_kind_from_string(const std::string& name) {
    if (name == "scalar") return OutputKind::scalar;
    if (name == "vector") return OutputKind::vector;
    if (name == "text") return OutputKind::text;
    throw EvalError("unknown output kind: " + name);
}

const char* to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::correct: return "correct";
    case Outcome::logical_error: return "logical_error";
    case Outcome::hallucination: return "hallucination";
    case Outcome::execution_error: return "execution_error";
    }
    return "execution_error";
}

namespace {

const std::array<const char*, 3> kHallucinationErrors = {"AttributeError", "ImportError",
                                                         "ModuleNotFoundError"};

bool is_exception_token(const std::string& name) {
    if (name.empty() || !std::isupper(static_cast<unsigned char>(name.front())))
        return false;
    auto ends_with = [&](const char* suffix) {
        std::string s(suffix);
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with("Error") || ends_with("Exception") || ends_with("Warning"))
        return true;
    static const std::array<const char*, 5> known = {"KeyboardInterrupt", "SystemExit",
                                                     "StopIteration", "StopAsyncIteration",
                                                     "GeneratorExit"};
    for (const char* k : known) {
        if (name == k)
            return true;
    }
    return false;
}

// The final "Name: message" (or bare "Name") line of a traceback; dotted
// names keep only the last component.
std::optional<std::string> final_exception_name(const std::string& stderr_text) {
    std::size_t end = stderr_text.size();
    while (end > 0) {
        std::size_t begin = stderr_text.rfind('\n', end - 1);
        std::size_t line_start = (begin == std::string::npos) ? 0 : begin + 1;
        std::string line = stderr_text.substr(line_start, end - line_start);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) {
            std::size_t i = 0;
            std::size_t tok_start = i;
            std::string last_component;
            while (i < line.size() &&
                   (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_' ||
                    line[i] == '.')) {
                if (line[i] == '.')
                    tok_start = i + 1;
                ++i;
            }
            if (i > 0 && (i == line.size() || line[i] == ':')) {
                last_component = line.substr(tok_start, i - tok_start);
                if (is_exception_token(last_component))
                    return last_component;
            }
            return std::nullopt; // final non-empty line is not an exception line
        }
        if (begin == std::string::npos)
            break;
        end = begin;
    }
    return std::nullopt;
}

} // namespace

ErrorClassification classify_error(const std::string& stderr_text, int exit_code) {
    ErrorClassification result;
    if (exit_code == 0)
        return result; // clean exit: outcome decided by output comparison

    result.is_error = true;
    auto name = final_exception_name(stderr_text);
    if (!name) {
        result.outcome = Outcome::execution_error;
        return result;
    }
    result.error_class = *name;
    for (const char* h : kHallucinationErrors) {
        if (*name == h) {
            result.outcome = Outcome::hallucination;
            return result;
        }
    }
    result.outcome = Outcome::logical_error;
    return result;
}

namespace {

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    bool in_space = true; // trims leading whitespace
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty())
            out += ' ';
        in_space = false;
        out += c;
    }
    return out;
}

} // namespace

CompareResult compare_output(const ExpectedOutput& actual, const ExpectedOutput& expected) {
    if (actual.kind != expected.kind)
        return {false, std::string("kind mismatch: expected ") + to_string(expected.kind) +
                           ", got " + to_string(actual.kind)};
    switch (expected.kind) {
    case OutputKind::scalar: {
        double diff = std::fabs(actual.scalar_value - expected.scalar_value);
        if (diff <= expected.tolerance)
            return {true, ""};
        return {false, "scalar difference " + std::to_string(diff) + " exceeds tolerance"};
    }
    case OutputKind::vector: {
        if (actual.vector_value.size() != expected.vector_value.size())
            return {false, "length mismatch"};
        double worst = 0.0;
        for (std::size_t i = 0; i < expected.vector_value.size(); ++i)
            worst = std::max(worst, std::fabs(actual.vector_value[i] - expected.vector_value[i]));
        if (worst <= expected.tolerance)
            return {true, ""};
        return {false, "max elementwise difference " + std::to_string(worst) + " exceeds tolerance"};
    }
    case OutputKind::text: {
        if (normalize_whitespace(actual.text_value) == normalize_whitespace(expected.text_value))
            return {true, ""};
        return {false, "text mismatch"};
    }
    }
    return {false, "unknown kind"};
}

Verdict evaluate_item(const BenchmarkItem& item, const Transcript& transcript) {
    Verdict verdict;
    verdict.item_id = item.item_id;

    auto classified = classify_error(transcript.stderr_text, transcript.exit_code);
    if (classified.is_error) {
        verdict.outcome = classified.outcome;
        verdict.matched = false;
        verdict.error_class = classified.error_class;
        return verdict;
    }

    if (!transcript.parsed_output) {
        verdict.outcome = Outcome::logical_error;
        verdict.matched = false;
        return verdict;
    }
    auto cmp = compare_output(*transcript.parsed_output, item.ground_truth);
    verdict.matched = cmp.matched;
    verdict.outcome = cmp.matched ? Outcome::correct : Outcome::logical_error;
    return verdict;
}

Report aggregate(const std::vector<BenchmarkItem>& items, const std::vector<Verdict>& verdicts,
                 const std::vector<Transcript>& transcripts) {
    if (items.empty())
        throw EvalError("cannot aggregate an empty item set");

    std::unordered_map<std::string, const Verdict*> by_id;
    for (const auto& v : verdicts)
        by_id[v.item_id] = &v;

    Report report;
    report.n_items = items.size();
    std::size_t correct = 0, logical = 0, halluc = 0, exec = 0;
    for (const auto& item : items) {
        auto it = by_id.find(item.item_id);
        if (it == by_id.end())
            throw EvalError("missing verdict for item " + item.item_id);
        auto& cat = report.per_category[to_string(item.category)];
        ++cat.n_items;
        switch (it->second->outcome) {
        case Outcome::correct: ++correct; ++cat.correct; break;
        case Outcome::logical_error: ++logical; ++cat.logical_error; break;
        case Outcome::hallucination: ++halluc; ++cat.hallucination; break;
        case Outcome::execution_error: ++exec; ++cat.execution_error; break;
        }
    }
    const double n = static_cast<double>(items.size());
    report.accuracy = static_cast<double>(correct) / n;
    report.logical_error_rate = static_cast<double>(logical) / n;
    report.hallucination_rate = static_cast<double>(halluc) / n;
    report.execution_error_rate = static_cast<double>(exec) / n;
    for (auto& [name, cat] : report.per_category)
        cat.accuracy = cat.n_items ? static_cast<double>(cat.correct) / static_cast<double>(cat.n_items)
                                   : 0.0;

    double lint_sum = 0.0;
    std::size_t lint_count = 0;
    for (const auto& t : transcripts) {
        if (t.lint_score) {
            lint_sum += *t.lint_score;
            ++lint_count;
        }
    }
    if (lint_count > 0)
        report.mean_lint = lint_sum / static_cast<double>(lint_count);
    return report;
}

namespace {

ExpectedOutput parse_expected(const json& j) {
    ExpectedOutput out;
    if (j.is_number()) {
        out.kind = OutputKind::scalar;
        out.scalar_value = j.get<double>();
        return out;
    }
    if (j.is_array()) {
        out.kind = OutputKind::vector;
        for (const auto& x : j)
            out.vector_value.push_back(x.get<double>());
        return out;
    }
    if (j.is_string()) {
        out.kind = OutputKind::text;
        out.text_value = j.get<std::string>();
        return out;
    }
    if (!j.is_object() || !j.contains("kind") || !j.contains("value"))
        throw EvalError("expected output must be {kind, value[, tolerance]} or a bare value");

    out.kind = output_kind_from_string(j["kind"].get<std::string>());
    const auto& value = j["value"];
    switch (out.kind) {
    case OutputKind::scalar:
        out.scalar_value = value.get<double>();
        break;
    case OutputKind::vector:
        for (const auto& x : value)
            out.vector_value.push_back(x.get<double>());
        if (out.vector_value.empty())
            throw EvalError("vector expected output must be non-empty");
        break;
    case OutputKind::text:
        out.text_value = value.get<std::string>();
        break;
    }
    if (j.contains("tolerance")) {
        out.tolerance = j["tolerance"].get<double>();
        if (out.tolerance < 0.0)
            throw EvalError("tolerance must be nonnegative");
    }
    return out;
}

Transcript parse_transcript_object(const json& doc, const std::string& origin) {
    if (!doc.is_object())
        throw EvalError("transcript must be a JSON object: " + origin);
    Transcript t;
    t.item_id = doc.at("id").get<std::string>();
    t.stdout_text = doc.value("stdout", "");
    t.stderr_text = doc.value("stderr", "");
    t.exit_code = doc.at("exit_code").get<int>();
    if (doc.contains("parsed_output") && !doc["parsed_output"].is_null())
        t.parsed_output = parse_expected(doc["parsed_output"]);
    if (doc.contains("lint_score") && !doc["lint_score"].is_null()) {
        double lint = doc["lint_score"].get<double>();
        if (lint < 0.0 || lint > 10.0)
            throw EvalError("lint_score must be in [0,10] in " + origin);
        t.lint_score = lint;
    }
    return t;
}

} // namespace

std::vector<BenchmarkItem> load_dataset(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw EvalError("cannot open dataset file: " + file.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw EvalError("dataset must be a JSON array: " + file.string());

    std::vector<BenchmarkItem> items;
    std::unordered_map<std::string, bool> seen;
    for (const auto& j : doc) {
        BenchmarkItem item;
        item.item_id = j.at("id").get<std::string>();
        if (seen.count(item.item_id))
            throw EvalError("duplicate item id: " + item.item_id);
        seen[item.item_id] = true;
        item.question = j.at("question").get<std::string>();
        item.category = category_from_string(j.at("category").get<std::string>());
        item.ground_truth = parse_expected(j.at("expected"));
        items.push_back(std::move(item));
    }
    return items;
}

Transcript load_transcript(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw EvalError("cannot open transcript file: " + file.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded())
        throw EvalError("transcript is not valid JSON: " + file.string());
    return parse_transcript_object(doc, file.string());
}

namespace {

std::string run_sandbox_command(const std::string& command_template, const fs::path& code_file) {
    std::string cmd = command_template;
    auto pos = cmd.find("{code}");
    if (pos == std::string::npos)
        throw EvalError("sandbox command template must contain {code}");
    cmd.replace(pos, 6, code_file.string());

    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        throw EvalError("failed to launch sandbox command");
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0)
        output.append(buf, got);
    int status = pclose(pipe);
    if (status != 0)
        throw EvalError("sandbox command failed with status " + std::to_string(status));
    return output;
}

Transcript transcript_from_json_text(const std::string& text, const std::string& origin) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw EvalError("sandbox command did not emit valid transcript JSON for " + origin);
    return parse_transcript_object(doc, origin);
}

} // namespace

EvalRun run_eval(const std::vector<BenchmarkItem>& items, const fs::path& transcripts_dir,
                 const std::string& sandbox_cmd) {
    if (!fs::is_directory(transcripts_dir))
        throw EvalError("transcript directory does not exist: " + transcripts_dir.string());

    EvalRun run;
    std::vector<Transcript> transcripts;
    for (const auto& item : items) {
        fs::path json_file = transcripts_dir / (item.item_id + ".json");
        fs::path code_file = transcripts_dir / (item.item_id + ".py");
        Transcript t;
        if (!sandbox_cmd.empty() && fs::exists(code_file)) {
            t = transcript_from_json_text(run_sandbox_command(sandbox_cmd, code_file),
                                          item.item_id);
        } else if (fs::exists(json_file)) {
            t = load_transcript(json_file);
        } else {
            throw EvalError("missing transcript for item " + item.item_id);
        }
        if (t.item_id != item.item_id)
            throw EvalError("transcript id " + t.item_id + " does not match item " + item.item_id);
        run.verdicts.push_back(evaluate_item(item, t));
        transcripts.push_back(std::move(t));
    }
    run.report = aggregate(items, run.verdicts, transcripts);
    return run;
}

std::string report_to_json(const Report& report) {
    json j;
    j["n_items"] = report.n_items;
    j["accuracy"] = report.accuracy;
    j["logical_error_rate"] = report.logical_error_rate;
    j["hallucination_rate"] = report.hallucination_rate;
    j["execution_error_rate"] = report.execution_error_rate;
    if (report.mean_lint)
        j["mean_lint"] = *report.mean_lint;
    else
        j["mean_lint"] = nullptr;
    json cats = json::object();
    for (const auto& [name, cat] : report.per_category) {
        cats[name] = {{"n_items", cat.n_items},
                      {"correct", cat.correct},
                      {"logical_error", cat.logical_error},
                      {"hallucination", cat.hallucination},
                      {"execution_error", cat.execution_error},
                      {"accuracy", cat.accuracy}};
    }
    j["per_category"] = cats;
    return j.dump(2);
}

std::string report_to_csv(const Report& report, const std::string& model_label,
                          const std::string& config_label) {
    std::ostringstream out;
    out << "model,config,accuracy,hallucination,lint\n";
    out << model_label << ',' << config_label << ',' << report.accuracy << ','
        << report.hallucination_rate << ',';
    if (report.mean_lint)
        out << *report.mean_lint;
    out << '\n';
    return out.str();
}

} // namespace coderag
