#include "wsm/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "wsm/errors.hpp"

namespace wsm {

json domain_to_json(const ObservationDomain& d) {
    json j = json::object();
    if (d.has_time()) {
        j["t_max"] = d.t_max();
    }
    if (d.has_space()) {
        const Rect& r = d.space();
        j["space"] = {r.x_lo, r.x_hi, r.y_lo, r.y_hi};
    }
    if (d.is_marked()) {
        j["n_marks"] = d.n_marks();
    }
    return j;
}

ObservationDomain domain_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("domain must be a JSON object");
    }
    std::optional<int> k;
    if (j.contains("n_marks")) {
        k = j.at("n_marks").get<int>();
    }
    std::optional<Rect> space;
    if (j.contains("space")) {
        const auto v = j.at("space").get<std::vector<double>>();
        if (v.size() != 4) {
            throw ConfigError("domain space needs [x_lo, x_hi, y_lo, y_hi]");
        }
        space = Rect{v[0], v[1], v[2], v[3]};
    }
    if (j.contains("t_max")) {
        const double t = j.at("t_max").get<double>();
        return space ? ObservationDomain::spatio_temporal(t, *space, k) : ObservationDomain::temporal(t, k);
    }
    if (!space) {
        throw ConfigError("domain needs t_max, space or both");
    }
    if (k) {
        throw ConfigError("marks need a time axis");
    }
    return ObservationDomain::spatial(*space);
}

json sequence_to_json(const PointSequence& seq, const ObservationDomain& d) {
    json j = json::object();
    if (d.has_time()) {
        j["t"] = seq.times;
    }
    if (d.has_space()) {
        json s = json::array();
        for (const Point2& p : seq.locs) {
            s.push_back({p[0], p[1]});
        }
        j["s"] = s;
    }
    if (d.is_marked()) {
        json k = json::array();
        for (const int m : seq.marks) {
            k.push_back(m + 1);
        }
        j["k"] = k;
    }
    if (seq.truncated) {
        j["truncated"] = true;
    }
    return j;
}

PointSequence sequence_from_json(const json& j, const ObservationDomain& d) {
    if (!j.is_object()) {
        throw ValidationError("sequence must be a JSON object");
    }
    PointSequence seq;
    if (j.contains("t")) {
        seq.times = j.at("t").get<std::vector<double>>();
    } else if (d.has_time()) {
        throw ValidationError("field t missing");
    }
    if (j.contains("s")) {
        for (const auto& p : j.at("s")) {
            const auto v = p.get<std::vector<double>>();
            if (v.size() != 2) {
                throw ValidationError("field s: locations need two coordinates");
            }
            seq.locs.push_back({v[0], v[1]});
        }
    } else if (d.has_space()) {
        throw ValidationError("field s missing");
    }
    if (j.contains("k")) {
        for (const auto& k : j.at("k")) {
            seq.marks.push_back(k.get<int>() - 1);
        }
    } else if (d.is_marked()) {
        throw ValidationError("field k missing");
    }
    seq.truncated = j.value("truncated", false);
    return seq;
}

void write_jsonl(std::ostream& os, const Dataset& ds) {
    const json header = {{"domain", domain_to_json(ds.domain)},
                         {"family", ds.family},
                         {"theta", ds.theta},
                         {"seed", ds.seed},
                         {"n_sequences", ds.sequences.size()}};
    os << header.dump() << '\n';
    for (const PointSequence& s : ds.sequences) {
        os << sequence_to_json(s, ds.domain).dump() << '\n';
    }
}

void write_jsonl(const std::string& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot open " + path + " for writing");
    }
    write_jsonl(os, ds);
}

Dataset read_jsonl(std::istream& is) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
        }
        try {
            if (!have_header) {
                ds.domain = domain_from_json(j.at("domain"));
                ds.family = j.value("family", json());
                ds.theta = j.value("theta", json());
                ds.seed = j.value("seed", std::uint64_t{0});
                have_header = true;
                continue;
            }
            PointSequence seq = sequence_from_json(j, ds.domain);
            ds.domain.validate(seq);
            ds.sequences.push_back(std::move(seq));
        } catch (const json::exception& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            const std::string where = have_header ? "line " + std::to_string(line_no) + " (sequence " +
                                                        std::to_string(ds.sequences.size()) + "): "
                                                  : "line " + std::to_string(line_no) + " (header): ";
            throw ValidationError(where + e.what());
        }
    }
    if (!have_header) {
        throw ValidationError("dataset is empty");
    }
    return ds;
}

Dataset read_jsonl(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError("cannot open " + path);
    }
    return read_jsonl(is);
}

} // namespace wsm
