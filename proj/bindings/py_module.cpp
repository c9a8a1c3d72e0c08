#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crm/attribution.hpp"
#include "crm/masking.hpp"
#include "crm/metrics.hpp"
#include "crm/pipeline.hpp"
#include "crm/prompts.hpp"
#include "crm/sha256.hpp"
#include "crm/trace.hpp"

namespace py = pybind11;
using namespace crm;

namespace {

// Steps as (tag, index, text) triples keep the python surface plain.
std::vector<std::tuple<std::string, int, std::string>> steps_of(const ReasoningTrace& t) {
    std::vector<std::tuple<std::string, int, std::string>> out;
    for (const auto& s : t.steps) out.emplace_back(to_string(s.tag), s.index, s.text);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "contrastive region masking harness (C++ core)";
    m.attr("__version__") = "0.1.0";

    py::class_<BoundingBox>(m, "BoundingBox")
        .def(py::init<int64_t, int64_t, int64_t, int64_t>(), py::arg("x"), py::arg("y"),
             py::arg("w"), py::arg("h"))
        .def_readwrite("x", &BoundingBox::x)
        .def_readwrite("y", &BoundingBox::y)
        .def_readwrite("w", &BoundingBox::w)
        .def_readwrite("h", &BoundingBox::h)
        .def("__repr__", [](const BoundingBox& b) {
            return "BoundingBox(" + std::to_string(b.x) + ", " + std::to_string(b.y) +
                   ", " + std::to_string(b.w) + ", " + std::to_string(b.h) + ")";
        });

    py::class_<Image>(m, "Image")
        .def_static("solid", &Image::solid, py::arg("w"), py::arg("h"), py::arg("r"),
                    py::arg("g"), py::arg("b"))
        .def_readonly("width", &Image::width)
        .def_readonly("height", &Image::height)
        .def_property_readonly("pixels",
                               [](const Image& img) {
                                   return py::bytes(
                                       reinterpret_cast<const char*>(img.pixels.data()),
                                       img.pixels.size());
                               })
        .def("pixel", [](const Image& img, int64_t x, int64_t y) {
            const unsigned char* p = img.at(x, y);
            return py::make_tuple(int(p[0]), int(p[1]), int(p[2]));
        });

    py::class_<ReasoningStep>(m, "ReasoningStep")
        .def_property_readonly("tag",
                               [](const ReasoningStep& s) { return to_string(s.tag); })
        .def_readonly("index", &ReasoningStep::index)
        .def_readonly("text", &ReasoningStep::text);

    py::class_<ReasoningTrace>(m, "ReasoningTrace")
        .def_property_readonly("steps", &steps_of)
        .def_property_readonly("final_conclusion",
                               [](const ReasoningTrace& t) -> py::object {
                                   if (!t.final_conclusion) return py::none();
                                   return py::str(*t.final_conclusion);
                               })
        .def_readonly("refusal", &ReasoningTrace::refusal)
        .def_readonly("garbage", &ReasoningTrace::garbage)
        .def_property_readonly("warnings", [](const ReasoningTrace& t) {
            std::vector<std::string> codes;
            for (const auto& w : t.warnings) codes.push_back(w.code);
            return codes;
        });

    py::class_<ScoringConfig>(m, "ScoringConfig")
        .def(py::init<>())
        .def_readwrite("step_threshold", &ScoringConfig::step_threshold)
        .def_readwrite("answer_threshold", &ScoringConfig::answer_threshold)
        .def_readwrite("match_floor", &ScoringConfig::match_floor);

    py::class_<StepAlignment>(m, "StepAlignment")
        .def_property_readonly("pairs",
                               [](const StepAlignment& a) {
                                   std::vector<std::tuple<size_t, size_t, double>> out;
                                   for (const auto& p : a.pairs)
                                       out.emplace_back(p.baseline_index, p.masked_index,
                                                        p.similarity);
                                   return out;
                               })
        .def_property_readonly("baseline_statuses",
                               [](const StepAlignment& a) {
                                   std::vector<std::string> out;
                                   for (auto s : a.baseline_statuses)
                                       out.push_back(to_string(s));
                                   return out;
                               })
        .def_property_readonly("masked_statuses", [](const StepAlignment& a) {
            std::vector<std::string> out;
            for (auto s : a.masked_statuses) out.push_back(to_string(s));
            return out;
        });

    m.def("sha256_hex", [](const std::string& s) { return sha256_hex(s); });
    m.def("build_cot_prompt", &prompts::build_cot_prompt, py::arg("question"));
    m.def("build_answer_prompt", &prompts::build_answer_prompt, py::arg("question"),
          py::arg("masked"));
    m.def("parse_trace",
          [](const std::string& raw) { return parse_trace(raw); }, py::arg("raw"));
    m.def("detect_refusal",
          [](const std::string& raw) { return detect_refusal(raw); }, py::arg("raw"));
    m.def("garbage_score", &garbage_score, py::arg("raw"));
    m.def("standard_error", &standard_error, py::arg("p"), py::arg("n"));
    m.def("derive_item_seed", &derive_item_seed, py::arg("mask_seed"), py::arg("item_id"));
    m.def("encode_ppm", [](const Image& img) {
        auto bytes = encode_ppm(img);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    });
    m.def("decode_ppm", [](const py::bytes& data) {
        std::string s = data;
        return decode_ppm(std::vector<unsigned char>(s.begin(), s.end()));
    });
    m.def(
        "mask_specific",
        [](const Image& img, const std::vector<BoundingBox>& boxes) {
            return mask_specific(img, boxes).image;
        },
        py::arg("image"), py::arg("boxes"));
    m.def(
        "sample_random_boxes",
        [](int64_t width, int64_t height, const std::vector<BoundingBox>& gt, size_t count,
           uint64_t seed) {
            return sample_random_boxes({width, height}, gt, count, seed);
        },
        py::arg("width"), py::arg("height"), py::arg("gt_boxes"), py::arg("count"),
        py::arg("seed"));
    m.def(
        "lexical_similarity",
        [](const std::string& a, const std::string& b) {
            LexicalBackend backend;
            return similarity(backend, a, b);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "align_step_texts",
        [](const std::string& baseline_raw, const std::string& masked_raw,
           const ScoringConfig& config) {
            LexicalBackend backend;
            return align_steps(parse_trace(baseline_raw), parse_trace(masked_raw), backend,
                               config);
        },
        py::arg("baseline_raw"), py::arg("masked_raw"),
        py::arg("config") = ScoringConfig{});
    m.def(
        "score_texts",
        [](const std::string& baseline_cot, const std::string& baseline_answer,
           const std::string& masked_cot, const std::string& masked_answer,
           const std::string& gt_step_hint, const ScoringConfig& config) {
            DatasetItem item;
            item.id = "py";
            item.image_ref = "py.ppm";
            item.question = "q";
            item.important_regions = {{0, 0, 1, 1}};
            if (!gt_step_hint.empty()) item.gt_step_hint = gt_step_hint;
            LexicalBackend backend;
            auto a = score_item(item, Condition::Specific, baseline_cot, baseline_answer,
                                masked_cot, masked_answer, backend, config);
            py::dict out;
            out["answer_flipped"] = a.answer_flipped;
            out["answer_similarity"] = a.answer_similarity;
            out["step_disrupted"] = a.step_disrupted;
            out["hallucinated"] = a.hallucinated;
            out["region_attribution"] = to_string(a.region_attribution);
            out["refusal"] = a.refusal;
            return out;
        },
        py::arg("baseline_cot"), py::arg("baseline_answer"), py::arg("masked_cot"),
        py::arg("masked_answer"), py::arg("gt_step_hint") = std::string(),
        py::arg("config") = ScoringConfig{});
    m.def(
        "aggregate_rates",
        [](const std::vector<std::tuple<bool, bool, bool>>& verdicts) {
            std::vector<ItemAttribution> attributions;
            size_t i = 0;
            for (const auto& [flip, disrupted, hallucinated] : verdicts) {
                ItemAttribution a;
                a.item_id = std::to_string(i++);
                a.condition = Condition::Specific;
                a.answer_flipped = flip;
                a.step_disrupted = disrupted;
                a.hallucinated = hallucinated;
                attributions.push_back(std::move(a));
            }
            MetricsSummary summary = aggregate(attributions);
            py::dict out;
            for (const auto& [metric, rate] : summary.rates)
                out[metric.c_str()] = py::make_tuple(rate.p, rate.se);
            return out;
        },
        py::arg("verdicts"));
}
