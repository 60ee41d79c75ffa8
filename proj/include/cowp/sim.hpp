#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cowp/errors.hpp"
#include "cowp/oracle.hpp"
#include "cowp/rng.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

/// An execution-time disturbance: raw crowd wording plus its sheet metadata.
struct Situation {
    std::string task;      // task identifier, e.g. "serve_water"
    std::string text;      // column A
    std::string step_ref;  // column B
    int group = 0;         // column C, 1-based distinguishable index
    std::string group_description; // column D

    auto operator<=>(const Situation&) const = default;
};

struct TaskSheet {
    std::vector<Situation> rows;
    size_t distinguishable = 0;

    /// Representative row (first occurrence) of a 1-based group index.
    const Situation* representative(int group) const {
        for (const auto& s : rows)
            if (s.group == group) return &s;
        return nullptr;
    }

    bool operator==(const TaskSheet&) const = default;
};

/// The twelve evaluation tasks with their distinguishable-situation counts.
inline const std::vector<std::pair<std::string, size_t>>& task_table() {
    static const std::vector<std::pair<std::string, size_t>> table = {
        {"Make coffee", 24}, {"Prepare burger", 21}, {"Heat burger", 19},
        {"Wash sink", 18},   {"Store food", 17},     {"Set table", 16},
        {"Wash plate", 16},  {"Clean floor", 15},    {"Serve water", 15},
        {"Wash cup", 15},    {"Serve coke", 14},     {"Wash glass", 12},
    };
    return table;
}

inline std::string task_identifier(std::string_view display) {
    return str::to_identifier(display);
}

struct SituationDataset {
    std::map<std::string, TaskSheet> sheets; // key: task identifier

    const TaskSheet* sheet(const std::string& task_ident) const {
        auto it = sheets.find(task_ident);
        return it == sheets.end() ? nullptr : &it->second;
    }

    size_t distinguishable(const std::string& task_ident) const {
        const TaskSheet* s = sheet(task_ident);
        return s ? s->distinguishable : 0;
    }
};

namespace detail {

/// Comma-separated with double-quote quoting; quotes double to escape.
inline std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // ignore
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void validate_sheet(const std::string& task_ident, TaskSheet& sheet) {
    if (sheet.rows.empty())
        throw FormatError("task '" + task_ident + "' has no situations");
    std::set<int> groups;
    for (const auto& s : sheet.rows) groups.insert(s.group);
    for (int g = 1; g <= static_cast<int>(groups.size()); ++g)
        if (!groups.count(g))
            throw FormatError("task '" + task_ident + "' group indexes not contiguous (" +
                              std::to_string(g) + " missing)");
    if (sheet.distinguishable != groups.size())
        throw FormatError("task '" + task_ident + "' declares " +
                          std::to_string(sheet.distinguishable) +
                          " distinguishable situations but has " +
                          std::to_string(groups.size()));
    if (sheet.distinguishable < 12 || sheet.distinguishable > 24)
        throw FormatError("task '" + task_ident + "' distinguishable count " +
                          std::to_string(sheet.distinguishable) +
                          " outside the expected 12..24 range");
}

/// Five columns: situation, step, group index, group description, group count.
inline TaskSheet parse_sheet(const std::string& task_ident, const std::string& text) {
    TaskSheet sheet;
    auto lines = str::split(text, '\n');
    size_t row_no = 0;
    std::optional<size_t> declared_count;
    for (const auto& raw : lines) {
        ++row_no;
        std::string line = str::trim(raw);
        if (line.empty()) continue;
        if (row_no == 1 && str::contains_ci(line, "situation")) continue; // header
        auto fields = parse_csv_line(line);
        if (fields.size() != 5)
            throw FormatError("row " + std::to_string(row_no) + ": expected 5 columns, got " +
                              std::to_string(fields.size()));
        Situation s;
        s.task = task_ident;
        s.text = str::trim(fields[0]);
        s.step_ref = str::trim(fields[1]);
        s.group_description = str::trim(fields[3]);
        if (s.text.empty())
            throw FormatError("row " + std::to_string(row_no) + ": empty situation text");
        try {
            s.group = std::stoi(fields[2]);
        } catch (...) {
            throw FormatError("row " + std::to_string(row_no) + ": bad group index '" +
                              fields[2] + "'");
        }
        if (s.group < 1)
            throw FormatError("row " + std::to_string(row_no) + ": group index must be >= 1");
        size_t count = 0;
        try {
            count = static_cast<size_t>(std::stoul(fields[4]));
        } catch (...) {
            throw FormatError("row " + std::to_string(row_no) + ": bad group count '" +
                              fields[4] + "'");
        }
        if (declared_count && *declared_count != count)
            throw FormatError("row " + std::to_string(row_no) +
                              ": inconsistent group count column");
        declared_count = count;
        sheet.rows.push_back(std::move(s));
    }
    sheet.distinguishable = declared_count.value_or(0);
    validate_sheet(task_ident, sheet);
    return sheet;
}

} // namespace detail

struct MissingTask : Error {
    using Error::Error;
};

/// Loads the situation dataset. A directory holds one CSV per task (named by
/// task identifier); a single file may carry a six-column form with a leading
/// task column.
inline SituationDataset load_dataset(const std::string& path) {
    namespace fs = std::filesystem;
    SituationDataset ds;
    if (fs::is_directory(path)) {
        for (const auto& [display, expected] : task_table()) {
            std::string ident = task_identifier(display);
            fs::path file = fs::path(path) / (ident + ".csv");
            if (!fs::exists(file))
                throw MissingTask("dataset lacks task '" + display + "' (" +
                                  file.string() + ")");
            ds.sheets[ident] =
                detail::parse_sheet(ident, detail::read_text_file(file.string()));
        }
        return ds;
    }

    std::string text = detail::read_text_file(path);
    auto lines = str::split(text, '\n');
    bool concatenated = !lines.empty() && str::contains_ci(lines[0], "task,");
    if (!concatenated) {
        std::string ident = task_identifier(fs::path(path).stem().string());
        ds.sheets[ident] = detail::parse_sheet(ident, text);
        return ds;
    }
    // Six-column concatenated form: split per task, then reuse the sheet parser.
    std::map<std::string, std::string> per_task;
    size_t row_no = 0;
    for (const auto& raw : lines) {
        ++row_no;
        std::string line = str::trim(raw);
        if (line.empty() || row_no == 1) continue;
        auto fields = detail::parse_csv_line(line);
        if (fields.size() != 6)
            throw FormatError("row " + std::to_string(row_no) + ": expected 6 columns, got " +
                              std::to_string(fields.size()));
        std::string ident = task_identifier(fields[0]);
        std::string rest;
        for (size_t i = 1; i < fields.size(); ++i) {
            if (i > 1) rest += ",";
            bool needs_quotes = fields[i].find(',') != std::string::npos ||
                                fields[i].find('"') != std::string::npos;
            if (needs_quotes) {
                std::string quoted = "\"";
                for (char c : fields[i]) quoted += (c == '"') ? std::string("\"\"") : std::string(1, c);
                rest += quoted + "\"";
            } else {
                rest += fields[i];
            }
        }
        per_task[ident] += rest + "\n";
    }
    for (auto& [ident, body] : per_task)
        ds.sheets[ident] = detail::parse_sheet(ident, body);
    return ds;
}

// ---------------------------------------------------------------------------
// Object catalog

struct CatalogEntry {
    std::string name;     // phrase form, e.g. "measuring cup"
    std::string category; // kitchenware | appliance | furniture | food | drink
};

struct ObjectCatalog {
    std::vector<CatalogEntry> entries;

    size_t category_count(const std::string& category) const {
        size_t n = 0;
        for (const auto& e : entries)
            if (e.category == category) ++n;
        return n;
    }
};

inline const std::set<std::string>& catalog_categories() {
    static const std::set<std::string> cats = {"kitchenware", "appliance", "furniture",
                                               "food", "drink"};
    return cats;
}

inline ObjectCatalog load_catalog(const std::string& path) {
    ObjectCatalog catalog;
    auto lines = str::split(detail::read_text_file(path), '\n');
    size_t row_no = 0;
    std::set<std::string> seen;
    for (const auto& raw : lines) {
        ++row_no;
        std::string line = str::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (row_no == 1 && str::contains_ci(line, "name")) continue;
        auto fields = detail::parse_csv_line(line);
        if (fields.size() != 2)
            throw FormatError("catalog row " + std::to_string(row_no) +
                              ": expected name,category");
        CatalogEntry e{str::lower(str::trim(fields[0])), str::lower(str::trim(fields[1]))};
        if (!catalog_categories().count(e.category))
            throw FormatError("catalog row " + std::to_string(row_no) +
                              ": unknown category '" + e.category + "'");
        if (!seen.insert(e.name).second)
            throw FormatError("catalog row " + std::to_string(row_no) + ": duplicate '" +
                              e.name + "'");
        catalog.entries.push_back(std::move(e));
    }
    if (catalog.entries.size() != 86)
        throw FormatError("catalog must hold 86 objects, found " +
                          std::to_string(catalog.entries.size()));
    if (catalog.category_count("kitchenware") != 29)
        throw FormatError("catalog must hold 29 kitchenware objects");
    if (catalog.category_count("drink") != 8)
        throw FormatError("catalog must hold 8 drink objects");
    return catalog;
}

/// Half of the catalog, uniformly without replacement, in catalog order.
/// Returned as (object name, object class) identifier pairs.
inline std::vector<std::pair<std::string, std::string>> spawn_objects(
    const ObjectCatalog& catalog, uint64_t seed) {
    Rng rng(seed);
    auto picks = rng.sample_indices(catalog.entries.size(), catalog.entries.size() / 2);
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(picks.size());
    for (size_t idx : picks) {
        std::string ident = str::to_identifier(catalog.entries[idx].name);
        out.emplace_back(ident, ident);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trial environment

/// Per-episode world seam: spawned objects, the situation injector, and the
/// ground-truth suitability judge that decides execution faults.
struct SimEnv {
    std::vector<std::pair<std::string, std::string>> objects; // (name, class)
    const MockRules* judge = nullptr;
    const SituationDataset* dataset = nullptr;
    std::string task; // identifier
    double inject_p = 0.0;
    Rng rng{0};
    std::optional<Situation> forced;
    size_t forced_at = 0;
    bool fired = false;

    /// Drawn once before each action; at most one situation per trial.
    std::optional<Situation> maybe_inject(size_t step_counter) {
        if (fired) return std::nullopt;
        if (forced) {
            if (step_counter >= forced_at) {
                fired = true;
                return forced;
            }
            return std::nullopt;
        }
        if (!dataset || inject_p <= 0.0) return std::nullopt;
        const TaskSheet* sheet = dataset->sheet(task);
        if (!sheet || sheet->distinguishable == 0) return std::nullopt;
        if (!rng.bernoulli(inject_p)) return std::nullopt;
        int group = 1 + static_cast<int>(rng.below(sheet->distinguishable));
        const Situation* s = sheet->representative(group);
        if (!s) return std::nullopt;
        fired = true;
        return *s;
    }

    /// Ground truth: would executing this action under the situation be
    /// acceptable? (The trial judge, independent of whatever oracle plans.)
    bool execution_ok(const std::string& action_nl, const std::string& situation) const {
        if (!judge || situation.empty()) return true;
        return judge->action_feasible(action_nl, situation);
    }
};

} // namespace cowp
