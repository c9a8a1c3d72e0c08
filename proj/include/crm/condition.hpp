#pragma once

#include <string>

#include "crm/error.hpp"

namespace crm {

enum class Condition { Baseline, Specific, Random };

inline std::string to_string(Condition c) {
    switch (c) {
        case Condition::Baseline: return "baseline";
        case Condition::Specific: return "specific";
        case Condition::Random: return "random";
    }
    return "baseline";
}

inline Condition condition_from_string(const std::string& s) {
    if (s == "baseline") return Condition::Baseline;
    if (s == "specific") return Condition::Specific;
    if (s == "random") return Condition::Random;
    throw Error("invalid-argument", "unknown condition '" + s + "'");
}

enum class GenerationStage { CoT, Answer };

inline std::string to_string(GenerationStage s) {
    return s == GenerationStage::CoT ? "cot" : "answer";
}

inline GenerationStage stage_from_string(const std::string& s) {
    if (s == "cot") return GenerationStage::CoT;
    if (s == "answer") return GenerationStage::Answer;
    throw Error("invalid-argument", "unknown stage '" + s + "'");
}

}  // namespace crm
