#include "crm/prompts.hpp"

#include "crm/error.hpp"
#include "crm/text.hpp"

namespace crm::prompts {

namespace {

const std::string kCotTemplate =
    "Think step by step to answer the given question about the image, and explain what message or idea it is trying to convey.\n"
    "Use your observations and commonsense knowledge.\n"
    "\n"
    "1) Visual Premises (VP): Identify and describe all key visual elements relevant to the question.\n"
    "2) Commonsense Premises (CP): For each VP, explain the typical meaning, function, or implication of the element based on commonsense knowledge.\n"
    "3) Inference/Conclusion (IC): Combine VP and CP to reason explicitly about what the image is showing and what it implies in relation to the question.\n"
    "4) Final Conclusion: Provide a final answer to the question based on the reasoning.\n"
    "\n"
    "Example\n"
    "Image: A cup is pouring tea into a brain. Below the brain, there is a loading bar with the words \"Loading CreaTEAvity\".\n"
    "Question: What is being poured into the brain?\n"
    "Reasoning:\n"
    "- VP1: A cup is pouring a brown liquid into a brain.\n"
    "- VP2: The brain is partially filled with the liquid.\n"
    "- VP3: There is a progress bar labeled \"Loading CreaTEAvity.\"\n"
    "- CP1: Brains symbolize intellect and creativity.\n"
    "- CP2: Brown liquids like tea or coffee are associated with mental stimulation.\n"
    "- CP3: A progress bar indicates an ongoing process or enhancement.\n"
    "- IC1: The brown liquid represents tea being used to metaphorically enhance mental creativity.\n"
    "- IC2: The progress bar reinforces the idea of creativity being gradually boosted.\n"
    "Final Conclusion: Tea is being poured into the brain, suggesting it enhances creativity.\n"
    "\n"
    "Question: {question}";

const std::string kAnswerTemplate =
    "Provide a final short answer to the question, based only on the image and bounding box context.\n"
    "Do not include step-by-step reasoning.\n"
    "Question: {question}";

const std::string kMaskedAnswerTemplate =
    "Provide the final short answer based only on the masked image and context. Do not include step-by-step reasoning.\n"
    "Question: {question}";

std::string substitute(const std::string& tpl, const std::string& question) {
    if (text::trim(question).empty())
        throw Error("empty-question", "question text is required");
    static const std::string kSlot = "{question}";
    size_t pos = tpl.find(kSlot);
    std::string out = tpl;
    out.replace(pos, kSlot.size(), question);
    return out;
}

}  // namespace

const std::string& cot_template() { return kCotTemplate; }

const std::string& answer_template(bool masked) {
    return masked ? kMaskedAnswerTemplate : kAnswerTemplate;
}

std::string build_cot_prompt(const std::string& question) {
    return substitute(kCotTemplate, question);
}

std::string build_answer_prompt(const std::string& question, bool masked) {
    return substitute(answer_template(masked), question);
}

}  // namespace crm::prompts
