#include "ssd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ssd/error.hpp"
#include "ssd/parallel.hpp"
#include "ssd/rng.hpp"

namespace ssd {

namespace {

std::string level_str(double level) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", level);
    return buf;
}

double fraction(std::size_t hits, std::size_t n) {
    return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace

const Prediction& EvaluationRecord::at(double level) const {
    const auto it = defended.find(level);
    if (it == defended.end()) throw ParameterError("strength level " + level_str(level) + " was not evaluated");
    return it->second;
}

std::vector<double> anchored_levels(const std::vector<double>& levels) {
    std::vector<double> out;
    if (levels.empty() || levels.front() != 0.0) out.push_back(0.0);
    out.insert(out.end(), levels.begin(), levels.end());
    return out;
}

Image defend(const SmootherSpec& spec, double level, const Image& img) {
    if (level == 0.0) return img;
    return apply_smoother(spec.with_strength(level), img);
}

void check_fingerprint(const Model& model, const AttackSet& set) {
    const auto fp = model.fingerprint();
    if (fp != set.model_fingerprint) {
        throw ConfigError("attack set was generated for model " + set.model_fingerprint + " but the model is " + fp);
    }
}

std::vector<EvaluationRecord> evaluate_defense(const Model& model, const AttackSet& set, const SmootherSpec& spec,
                                               const std::vector<double>& levels, unsigned workers) {
    check_fingerprint(model, set);
    validate(spec);
    for (double level : levels) {
        if (level != 0.0) (void)spec.with_strength(level);
    }
    std::vector<EvaluationRecord> records(set.entries.size());
    parallel_for(set.entries.size(), workers, [&](std::size_t i) {
        const AttackEntry& e = set.entries[i];
        EvaluationRecord& r = records[i];
        r.sample_id = e.id;
        r.true_label = e.true_label;
        r.clean_label = e.clean_label;
        r.clean_confidence = e.clean_confidence;
        r.adv_prediction = predict(model, e.adv_image);
        for (double level : levels) {
            r.defended[level] = level == 0.0 ? r.adv_prediction : predict(model, defend(spec, level, e.adv_image));
        }
    });
    std::sort(records.begin(), records.end(),
              [](const EvaluationRecord& a, const EvaluationRecord& b) { return a.sample_id < b.sample_id; });
    return records;
}

SweepResult sweep_from_records(const std::vector<EvaluationRecord>& records, const std::vector<double>& levels,
                               const std::string& name) {
    SweepResult s;
    s.name = name;
    s.axis = levels;
    s.n = records.size();
    for (double level : levels) {
        std::size_t hits = 0;
        for (const auto& r : records) hits += r.correct_at(level) ? 1 : 0;
        s.accuracy.push_back(fraction(hits, records.size()));
    }
    return s;
}

DefenseSweep defense_strength_sweep(const Model& model, const AttackSet& set, const SmootherSpec& spec,
                                    const std::vector<double>& levels, unsigned workers) {
    if (set.entries.empty()) throw ConfigError("attack set is empty");
    const auto axis = anchored_levels(levels);
    DefenseSweep out;
    out.records = evaluate_defense(model, set, spec, axis, workers);
    out.sweep = sweep_from_records(out.records, axis, "defended");
    out.sweep.fingerprint = set.model_fingerprint;
    return out;
}

AttackIterationSweep attack_iteration_sweep(const Model& model, const Dataset& data, const PgdSpec& pgd,
                                            const SmootherSpec& defense, const std::vector<int>& iteration_axis,
                                            std::size_t sample_limit, unsigned workers) {
    validate(pgd);
    validate(defense);
    if (iteration_axis.empty()) throw ParameterError("iteration axis is empty");
    for (std::size_t i = 0; i < iteration_axis.size(); ++i) {
        if (iteration_axis[i] < 1 || (i > 0 && iteration_axis[i] <= iteration_axis[i - 1])) {
            throw ParameterError("iteration axis must be strictly increasing positive counts");
        }
    }
    data.validate();

    std::vector<char> clean_ok(data.size(), 0);
    parallel_for(data.size(), workers,
                 [&](std::size_t i) { clean_ok[i] = predict(model, data.images[i]).label == data.labels[i]; });
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < data.size() && (sample_limit == 0 || ids.size() < sample_limit); ++i) {
        if (clean_ok[i]) ids.push_back(i);
    }

    const std::size_t points = iteration_axis.size();
    std::vector<std::vector<char>> def(ids.size()), und(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t k) {
        const std::size_t id = ids[k];
        const int label = data.labels[id];
        PgdSpec spec = pgd;
        spec.step_size = pgd.resolved_step_size();
        spec.seed = derive_seed(pgd.seed, id);
        PgdRun run(model, data.images[id], label, spec);
        def[k].resize(points);
        und[k].resize(points);
        for (std::size_t p = 0; p < points; ++p) {
            run.advance(iteration_axis[p] - run.iterations_done());
            und[k][p] = predict(model, run.current()).label == label;
            def[k][p] = predict(model, apply_smoother(defense, run.current())).label == label;
        }
    });

    AttackIterationSweep out;
    out.defended.name = "defended";
    out.undefended.name = "undefended";
    for (auto* s : {&out.defended, &out.undefended}) {
        s->n = ids.size();
        s->fingerprint = model.fingerprint();
        for (int it : iteration_axis) s->axis.push_back(it);
    }
    for (std::size_t p = 0; p < points; ++p) {
        std::size_t d = 0, u = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            d += def[k][p];
            u += und[k][p];
        }
        out.defended.accuracy.push_back(fraction(d, ids.size()));
        out.undefended.accuracy.push_back(fraction(u, ids.size()));
    }
    return out;
}

CategoryStats per_category_accuracy(const std::vector<EvaluationRecord>& records, double level) {
    std::map<int, std::pair<std::size_t, std::size_t>> per; // class -> (hits, count)
    for (const auto& r : records) {
        auto& [hits, count] = per[r.true_label];
        hits += r.correct_at(level) ? 1 : 0;
        ++count;
    }
    struct Row {
        int cls;
        double acc;
        std::size_t count;
    };
    std::vector<Row> rows;
    for (const auto& [cls, hc] : per) rows.push_back({cls, fraction(hc.first, hc.second), hc.second});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.acc < b.acc; });
    CategoryStats s;
    for (const auto& row : rows) {
        s.classes.push_back(row.cls);
        s.accuracy.push_back(row.acc);
        s.counts.push_back(row.count);
    }
    return s;
}

SubsetSelection select_optimal_subset(const std::vector<EvaluationRecord>& records, double level, std::size_t size) {
    std::vector<const EvaluationRecord*> eligible;
    for (const auto& r : records) {
        if (r.correct_at(level)) eligible.push_back(&r);
    }
    std::sort(eligible.begin(), eligible.end(), [&](const EvaluationRecord* a, const EvaluationRecord* b) {
        const double ca = a->at(level).confidence;
        const double cb = b->at(level).confidence;
        if (ca != cb) return ca > cb;
        return a->sample_id < b->sample_id;
    });
    SubsetSelection sel;
    const std::size_t take = std::min(size, eligible.size());
    sel.shortfall = size - take;
    for (std::size_t i = 0; i < take; ++i) sel.sample_ids.push_back(eligible[i]->sample_id);
    return sel;
}

SubsetTable cross_evaluate_subsets(const std::vector<MethodRecords>& methods, std::size_t size) {
    if (methods.empty()) throw ConfigError("no defense methods to compare");
    auto universe = [](const MethodRecords& m) {
        std::set<std::size_t> ids;
        for (const auto& r : m.records) ids.insert(r.sample_id);
        return ids;
    };
    const auto reference = universe(methods.front());
    for (const auto& m : methods) {
        if (universe(m) != reference) {
            throw ConfigError("methods \"" + methods.front().name + "\" and \"" + m.name +
                              "\" were evaluated on different samples");
        }
    }

    SubsetTable t;
    for (const auto& m : methods) t.methods.push_back(m.name);
    for (const auto& row : methods) {
        const auto subset = select_optimal_subset(row.records, row.level, size);
        t.subset_sizes.push_back(subset.sample_ids.size());
        const std::set<std::size_t> chosen(subset.sample_ids.begin(), subset.sample_ids.end());
        std::vector<double> accs;
        for (const auto& col : methods) {
            std::size_t hits = 0;
            for (const auto& r : col.records) {
                if (chosen.count(r.sample_id)) hits += r.correct_at(col.level) ? 1 : 0;
            }
            accs.push_back(chosen.empty() ? 0.0 : fraction(hits, chosen.size()));
        }
        t.accuracy.push_back(std::move(accs));
    }
    return t;
}

std::vector<MinIterationRecord> min_defense_iterations(const Model& model, const AttackSet& set,
                                                       const SmootherSpec& spec, int cap, unsigned workers) {
    if (!spec.iterative()) {
        throw ParameterError(std::string(to_string(spec.method())) +
                             " is not iterative; minimum defense iterations needs anisotropic_diffusion or "
                             "modified_curvature_motion");
    }
    if (cap < 0) throw ParameterError("iteration cap must be >= 0");
    check_fingerprint(model, set);
    validate(spec);

    std::vector<MinIterationRecord> out(set.entries.size());
    parallel_for(set.entries.size(), workers, [&](std::size_t i) {
        const AttackEntry& e = set.entries[i];
        MinIterationRecord& r = out[i];
        r.sample_id = e.id;
        r.true_label = e.true_label;
        r.correct_at.resize(static_cast<std::size_t>(cap) + 1);
        Image state = e.adv_image;
        for (int k = 0; k <= cap; ++k) {
            if (k > 0) state = smoother_step(spec, state);
            const bool ok = predict(model, clamp01(state)).label == e.true_label;
            r.correct_at[static_cast<std::size_t>(k)] = ok;
            if (ok && !r.min_iterations) r.min_iterations = k;
        }
    });
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    return out;
}

double adaptive_upper_bound_accuracy(const std::vector<MinIterationRecord>& records) {
    if (records.empty()) throw ParameterError("no minimum-iteration records");
    std::size_t ok = 0;
    for (const auto& r : records) ok += r.undefendable() ? 0 : 1;
    return fraction(ok, records.size());
}

double fixed_iteration_accuracy(const std::vector<MinIterationRecord>& records, int iterations) {
    if (records.empty()) throw ParameterError("no minimum-iteration records");
    std::size_t ok = 0;
    for (const auto& r : records) {
        if (iterations < 0 || static_cast<std::size_t>(iterations) >= r.correct_at.size()) {
            throw ParameterError("iteration " + std::to_string(iterations) + " is outside the recorded range");
        }
        ok += r.correct_at[static_cast<std::size_t>(iterations)] ? 1 : 0;
    }
    return fraction(ok, records.size());
}

std::vector<std::size_t> min_iteration_histogram(const std::vector<MinIterationRecord>& records, int cap) {
    std::vector<std::size_t> bins(static_cast<std::size_t>(cap) + 2, 0);
    for (const auto& r : records) {
        if (r.undefendable()) {
            ++bins.back();
        } else {
            ++bins[static_cast<std::size_t>(*r.min_iterations)];
        }
    }
    return bins;
}

} // namespace ssd
