#pragma once

#include <map>
#include <string>
#include <vector>

#include "cowp/errors.hpp"
#include "cowp/nl.hpp"
#include "cowp/oracle.hpp"
#include "cowp/pddl_parser.hpp"
#include "cowp/sim.hpp"

namespace cowp {

struct TaskFixture {
    std::string display; // "Serve water"
    std::string ident;   // "serve_water"
    std::string nl;      // "serving water"
    DomainDescription domain;
    ProblemDescription problem;
};

/// Everything the toolkit reads from the data directory: task fixtures, the
/// object catalog, the situation dataset, sentence patterns, the situation
/// lexicon, and the mock rule base (nouns merged from all of the above).
struct DataBundle {
    std::vector<TaskFixture> tasks;
    ObjectCatalog catalog;
    SituationDataset dataset;
    NlPatternTable patterns;
    SituationLexicon lexicon;
    MockRules rules;

    const TaskFixture* fixture(const std::string& name) const {
        std::string ident = task_identifier(name);
        for (const auto& t : tasks)
            if (t.ident == ident) return &t;
        return nullptr;
    }
};

inline DataBundle load_bundle(const std::string& data_dir) {
    DataBundle b;
    b.patterns = NlPatternTable::from_text(detail::read_text_file(data_dir + "/nl_patterns.txt"));
    b.lexicon =
        SituationLexicon::from_text(detail::read_text_file(data_dir + "/situation_lexicon.txt"));
    b.catalog = load_catalog(data_dir + "/objects.csv");
    b.dataset = load_dataset(data_dir + "/situations");
    b.rules = MockRules::from_text(detail::read_text_file(data_dir + "/mock_kb.txt"));

    auto lines = str::split(detail::read_text_file(data_dir + "/tasks.csv"), '\n');
    size_t row_no = 0;
    for (const auto& raw : lines) {
        ++row_no;
        std::string line = str::trim(raw);
        if (line.empty() || (row_no == 1 && str::contains_ci(line, "task,"))) continue;
        auto fields = detail::parse_csv_line(line);
        if (fields.size() != 4)
            throw FormatError("tasks.csv row " + std::to_string(row_no) +
                              ": expected task,nl,domain,problem");
        TaskFixture t;
        t.display = str::trim(fields[0]);
        t.ident = task_identifier(t.display);
        t.nl = str::trim(fields[1]);
        t.domain =
            parse_domain(detail::read_text_file(data_dir + "/" + str::trim(fields[2])));
        t.problem = parse_problem(
            detail::read_text_file(data_dir + "/" + str::trim(fields[3])), t.domain);
        b.tasks.push_back(std::move(t));
    }
    if (b.tasks.size() != task_table().size())
        throw FormatError("tasks.csv must list all " +
                          std::to_string(task_table().size()) + " tasks");

    // Subjects the mock can recognize: catalog names, lexicon nouns, domain
    // types, and problem constants (the robot itself is never a subject).
    for (const auto& e : b.catalog.entries) b.rules.nouns.add(e.name);
    for (const auto& n : b.lexicon.nouns.nouns) b.rules.nouns.add(n);
    for (const auto& t : b.tasks) {
        for (const auto& [type, parent] : t.domain.types.entries)
            b.rules.nouns.add_identifier(type);
        for (const auto& [obj, type] : t.problem.objects)
            if (type != "robot") b.rules.nouns.add_identifier(obj);
    }
    return b;
}

} // namespace cowp
