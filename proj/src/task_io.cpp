#include "ecomlm/task_io.hpp"

#include <fstream>

#include "ecomlm/errors.hpp"

namespace ecomlm::taskgen {

using nlohmann::json;

json instance_to_json(const TaskInstance& inst) {
    json j;
    j["schema"] = 1;
    j["kind"] = kind_name(inst.kind);
    j["language"] = inst.language;
    if (is_choice_task(inst.kind)) {
        j["choices"] = inst.choices;
        j["gold"] = inst.gold_index;
    } else {
        j["prompt"] = inst.prompt;
        j["gold"] = inst.gold;
    }
    json prov;
    prov["listing_ids"] = inst.provenance.listing_ids;
    prov["seed"] = inst.provenance.seed;
    prov["ordinal"] = inst.provenance.ordinal;
    if (!inst.provenance.corruptions.empty()) {
        json notes = json::array();
        for (const auto& c : inst.provenance.corruptions) {
            json n{{"key", c.key}, {"original", c.original}, {"replacement", c.replacement}};
            if (!c.factor.empty()) n["factor"] = c.factor;
            notes.push_back(std::move(n));
        }
        prov["corruptions"] = std::move(notes);
    }
    j["provenance"] = std::move(prov);
    return j;
}

TaskInstance instance_from_json(const json& j) {
    if (!j.is_object() || j.value("schema", 0) != 1) {
        throw DataError("task line missing \"schema\": 1");
    }
    TaskInstance inst;
    const auto kind = kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw DataError("unknown task kind \"" + j.at("kind").get<std::string>() + "\"");
    inst.kind = *kind;
    inst.language = j.at("language").get<std::string>();
    if (is_choice_task(inst.kind)) {
        inst.choices = j.at("choices").get<std::vector<std::string>>();
        inst.gold_index = j.at("gold").get<int>();
        if (inst.choices.size() != 4 || inst.gold_index < 0 || inst.gold_index > 3) {
            throw DataError("choice task must have 4 choices and gold index in 0..3");
        }
    } else {
        inst.prompt = j.at("prompt").get<std::string>();
        inst.gold = j.at("gold").get<std::vector<std::string>>();
        if (inst.gold.empty()) throw DataError("generation task must have a non-empty gold");
    }
    if (const auto prov = j.find("provenance"); prov != j.end()) {
        inst.provenance.listing_ids = prov->value("listing_ids", std::vector<std::string>{});
        inst.provenance.seed = prov->value("seed", uint64_t{0});
        inst.provenance.ordinal = prov->value("ordinal", uint64_t{0});
        if (const auto notes = prov->find("corruptions"); notes != prov->end()) {
            for (const auto& n : *notes) {
                inst.provenance.corruptions.push_back({n.value("key", ""), n.value("original", ""),
                                                       n.value("replacement", ""),
                                                       n.value("factor", "")});
            }
        }
    }
    return inst;
}

void write_task_file(const std::string& path, const std::vector<TaskInstance>& instances,
                     const json* run_config) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write task file: " + path);
    if (run_config != nullptr) {
        json header{{"schema", 1}, {"type", "run_config"}, {"config", *run_config}};
        out << header.dump() << '\n';
    }
    for (const auto& inst : instances) {
        out << instance_to_json(inst).dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

TaskFile read_task_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read task file: " + path);
    TaskFile tf;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON");
        }
        if (j.is_object() && j.value("type", "") == "run_config") {
            tf.run_config = j.value("config", json());
            continue;
        }
        try {
            tf.instances.push_back(instance_from_json(j));
        } catch (const std::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return tf;
}

} // namespace ecomlm::taskgen
