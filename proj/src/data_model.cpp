#include "mia/data_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace mia {

using nlohmann::json;

std::vector<BlindRecord> blind_view(const ProbeDataset& ds) {
    std::vector<BlindRecord> view;
    view.reserve(ds.records.size());
    for (const auto& r : ds.records) view.push_back({&r.id, &r.probs, r.true_label});
    return view;
}

void validate_record(const ProbeRecord& rec) {
    if (rec.probs.empty())
        throw ValidationError("record '" + rec.id + "': empty probability vector");
    double sum = 0.0;
    for (double p : rec.probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ValidationError("record '" + rec.id + "': probability out of [0,1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > kProbSumTolerance) {
        std::ostringstream os;
        os << "record '" << rec.id << "': probabilities sum to " << sum
           << ", expected 1 within " << kProbSumTolerance;
        throw ValidationError(os.str());
    }
    if (rec.true_label) {
        const int t = *rec.true_label;
        if (t < 0 || static_cast<std::size_t>(t) >= rec.probs.size())
            throw ValidationError("record '" + rec.id + "': true_label out of range");
    }
}

void validate_dataset(const ProbeDataset& ds) {
    std::unordered_set<std::string> seen;
    for (const auto& rec : ds.records) {
        validate_record(rec);
        if (rec.probs.size() != ds.num_classes)
            throw ValidationError("record '" + rec.id + "': dimension " +
                                  std::to_string(rec.probs.size()) + " != dataset dimension " +
                                  std::to_string(ds.num_classes));
        if (!seen.insert(rec.id).second)
            throw ValidationError("duplicate record id '" + rec.id + "'");
    }
}

ProbeDataset load_probe_records(const std::string& path,
                                std::optional<std::size_t> expected_classes) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open probe file: " + path);

    ProbeDataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("_meta")) continue;

        ProbeRecord rec;
        try {
            rec.id = j.at("id").get<std::string>();
            rec.probs = j.at("probs").get<std::vector<double>>();
            if (j.contains("true_label") && !j["true_label"].is_null())
                rec.true_label = j["true_label"].get<int>();
            if (j.contains("is_member") && !j["is_member"].is_null())
                rec.is_member = j["is_member"].get<bool>();
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        try {
            validate_record(rec);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (ds.records.empty()) {
            ds.num_classes = rec.probs.size();
        } else if (rec.probs.size() != ds.num_classes) {
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": dimension mismatch (" + std::to_string(rec.probs.size()) +
                                  " vs " + std::to_string(ds.num_classes) + ")");
        }
        ds.records.push_back(std::move(rec));
    }
    if (expected_classes && ds.num_classes != *expected_classes)
        throw ValidationError(path + ": expected " + std::to_string(*expected_classes) +
                              " classes, file has " + std::to_string(ds.num_classes));
    validate_dataset(ds);
    return ds;
}

void save_probe_records(const ProbeDataset& ds, const std::string& path,
                        const std::string& digest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write probe file: " + path);
    if (!digest.empty()) out << json{{"_meta", {{"config_digest", digest}}}}.dump() << '\n';
    for (const auto& rec : ds.records) {
        json j{{"id", rec.id}, {"probs", rec.probs}};
        if (rec.true_label) j["true_label"] = *rec.true_label;
        if (rec.is_member) j["is_member"] = *rec.is_member;
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_predictions(const std::vector<MembershipPrediction>& preds,
                      const std::string& path, const std::string& digest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write predictions: " + path);
    if (!digest.empty()) out << "# config_digest=" << digest << '\n';
    out << "id,predicted_member,variant\n";
    for (const auto& p : preds)
        out << p.id << ',' << (p.predicted_member ? "true" : "false") << ',' << p.variant << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<MembershipPrediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open predictions: " + path);
    std::vector<MembershipPrediction> preds;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "id,predicted_member,variant")
                throw ValidationError(path + ": unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        MembershipPrediction p;
        std::string member_str;
        if (!std::getline(ss, p.id, ',') || !std::getline(ss, member_str, ',') ||
            !std::getline(ss, p.variant))
            throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed row");
        if (member_str == "true") p.predicted_member = true;
        else if (member_str == "false") p.predicted_member = false;
        else throw ValidationError(path + ":" + std::to_string(lineno) +
                                   ": predicted_member must be true/false");
        preds.push_back(std::move(p));
    }
    if (!header_seen) throw ValidationError(path + ": missing header");
    return preds;
}

}  // namespace mia
