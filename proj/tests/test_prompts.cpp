#include <doctest.h>

#include "crm/error.hpp"
#include "crm/prompts.hpp"
#include "crm/sha256.hpp"

using namespace crm;

// Pinned pre-substitution template digests. A failure here means the prompt
// wording changed, which invalidates comparability of runs; update only on
// purpose.
TEST_CASE("template hashes are pinned") {
    CHECK(sha256_hex(prompts::cot_template()) ==
          "26e3910ef52aef8515d48cb6d2d38297920d72970eb9bf2c39dc21ac96bfa666");
    CHECK(sha256_hex(prompts::answer_template(false)) ==
          "8ece827e56bbb776c37225fcdfa4ee48a2ab5b0c6d19a830f5b384d18d446d9f");
    CHECK(sha256_hex(prompts::answer_template(true)) ==
          "fd8a12575b1b200d74748c2f4802c750b7d4eb48c3c34f51d682eb2861e08e52");
}

TEST_CASE("cot prompt substitutes the question at the tail") {
    std::string prompt = prompts::build_cot_prompt("Q?");
    CHECK(prompt.size() > 100);
    CHECK(prompt.substr(prompt.size() - 12) == "Question: Q?");
    CHECK(prompt.find("Visual Premises (VP)") != std::string::npos);
    CHECK(prompt.find("Loading CreaTEAvity") != std::string::npos);

    CHECK(prompts::build_cot_prompt("Q?") == prompt);  // byte-stable
}

TEST_CASE("a literal {question} inside the question is not re-expanded") {
    std::string prompt = prompts::build_cot_prompt("does {question} confuse you?");
    CHECK(prompt.find("does {question} confuse you?") != std::string::npos);
    // the slot itself was consumed
    CHECK(prompt.rfind("{question}") ==
          prompt.find("does {question} confuse you?") + 5);
}

TEST_CASE("answer prompt variants") {
    std::string unmasked = prompts::build_answer_prompt("Q?", false);
    std::string masked = prompts::build_answer_prompt("Q?", true);
    CHECK(unmasked.find("based only on the image and bounding box context") !=
          std::string::npos);
    CHECK(masked.find("based only on the masked image and context") != std::string::npos);
    CHECK(unmasked.find("Do not include step-by-step reasoning.") != std::string::npos);
    CHECK(masked.find("Do not include step-by-step reasoning.") != std::string::npos);
    CHECK(unmasked.substr(unmasked.size() - 12) == "Question: Q?");
    CHECK(masked.substr(masked.size() - 12) == "Question: Q?");
}

TEST_CASE("empty question is rejected") {
    CHECK_THROWS_AS(prompts::build_cot_prompt(""), Error);
    CHECK_THROWS_AS(prompts::build_answer_prompt("  \n", false), Error);
}
