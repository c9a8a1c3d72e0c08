#include "crm/fixtures.hpp"

#include <vector>

#include <json.hpp>

#include "crm/dataset.hpp"
#include "crm/error.hpp"
#include "crm/masking.hpp"
#include "crm/pipeline.hpp"
#include "crm/prompts.hpp"
#include "crm/runstore.hpp"
#include "crm/sha256.hpp"

namespace crm::fixtures {

using nlohmann::json;

Mode mode_from_string(const std::string& s) {
    if (s == "normal") return Mode::Normal;
    if (s == "identity") return Mode::Identity;
    if (s == "scrambled") return Mode::Scrambled;
    throw Error("invalid-argument", "unknown fixture mode '" + s + "'");
}

namespace {

struct Scenario {
    DatasetItem item;
    const char* baseline_cot;
    const char* baseline_answer;
    const char* masked_cot;     // specific condition, Normal mode
    const char* masked_answer;  // specific condition, Normal mode
};

// Shares no vocabulary (including stopwords) with any baseline trace, so
// every baseline step disappears under alignment.
const char* kScrambledCot =
    "- VP1: Zebra quartz violin nebula crater.\n"
    "- VP2: Frozen crater zebras orbit slowly.\n"
    "- CP1: Quartz violins hum beneath nebulas.\n"
    "- IC1: Orbiting craters vibrate beyond measure.\n"
    "Final Conclusion: Quartz nebula violin.";

const char* kScrambledAnswer = "Quartz nebula";

std::vector<Scenario> scenarios() {
    std::vector<Scenario> out;

    {
        DatasetItem item;
        item.id = "brain_loading_tea";
        item.image_ref = "brain_loading_tea.ppm";
        item.question = "What is being poured into the brain in the image?";
        item.important_regions = {{10, 8, 24, 18}};
        item.irrelevant_regions = {{64, 40, 20, 14}};
        item.gt_step_hint = "a glass cup pouring brown tea liquid";
        item.topic = "metaphor";
        item.difficulty = "easy";
        out.push_back(
            {item,
             "- VP1: A glass cup is pouring a brown liquid into a large brain outline.\n"
             "- VP2: There is a loading bar under the brain with the words \"Loading "
             "CreaTEAvity\".\n"
             "- VP3: The background is a plain light poster with no other objects.\n"
             "- CP1: Brown liquid poured from a cup usually suggests tea or coffee.\n"
             "- CP2: A loading bar usually communicates progress toward something.\n"
             "- IC1: The poster links drinking tea with charging up creativity.\n"
             "Final Conclusion: Tea is being poured into the brain.",
             "Tea",
             "- VP1: A large black rectangle covers the top area above the brain outline.\n"
             "- VP2: There is a loading bar under the brain with the words \"Loading "
             "CreaTEAvity\".\n"
             "- VP3: The background is a plain light poster with no other objects.\n"
             "- CP1: A loading bar usually communicates progress toward something.\n"
             "- IC1: The poster seems to link an unseen source with charging up "
             "creativity.\n"
             "Final Conclusion: Creativity is being loaded into the brain.",
             "Creativity"});
    }

    {
        DatasetItem item;
        item.id = "fish_container";
        item.image_ref = "fish_container.ppm";
        item.question = "What type of container is shown hanging from the fishing hook?";
        item.important_regions = {{60, 6, 22, 20}};
        item.irrelevant_regions = {{6, 44, 18, 12}};
        item.gt_step_hint = "a transparent plastic bottle hanging from the hook";
        item.topic = "advertisement";
        item.difficulty = "medium";
        out.push_back(
            {item,
             "- VP1: A clear plastic bottle hangs from a fishing hook over the water.\n"
             "- VP2: A large fish watches the bottle from below the surface.\n"
             "- VP3: A caption at the bottom reads \"Catch of the day\".\n"
             "- CP1: Bait on a hook is meant to lure the fish toward it.\n"
             "- IC1: The bottle is presented as bait, blaming litter for harming sea "
             "life.\n"
             "Final Conclusion: A plastic bottle is hanging from the hook.",
             "A plastic bottle",
             "- VP1: A black rectangle hangs from a fishing line over the water.\n"
             "- VP2: A large fish looks upward from below toward the hidden shape.\n"
             "- VP3: A caption at the bottom reads \"Catch of the day\".\n"
             "- VP4: The hidden shape is probably a plastic bottle used as bait.\n"
             "- CP1: Bait on a hook is meant to lure the fish toward it.\n"
             "- IC1: The advert suggests something harmful is being dangled above the "
             "sea.\n"
             "Final Conclusion: A plastic bag is hanging from the hook.",
             "A plastic bag"});
    }

    {
        DatasetItem item;
        item.id = "couch_panda_ad";
        item.image_ref = "couch_panda_ad.ppm";
        item.question = "What is the boy on the couch looking at?";
        item.important_regions = {{40, 20, 26, 22}};
        item.irrelevant_regions = {{4, 4, 16, 10}};
        item.gt_step_hint = "a panda sitting on the sofa using a laptop";
        item.topic = "advertisement";
        item.difficulty = "hard";
        out.push_back(
            {item,
             "- VP1: A young boy sits on a couch inside a lush green jungle.\n"
             "- VP2: A panda sits next to the boy on the couch using a laptop.\n"
             "- VP3: The boy is looking directly at the panda.\n"
             "- VP4: A logo with the text \"Internet + TV | Dive into impressions\" sits "
             "in the corner.\n"
             "- CP1: A panda with a laptop mixes wild nature with modern technology.\n"
             "- CP2: Advertisements pair surprising scenes with a short slogan.\n"
             "- IC1: The ad promises internet and television access even in remote "
             "places.\n"
             "Final Conclusion: The boy is looking at the panda using a laptop.",
             "The panda using a laptop",
             "- VP1: A young boy sits on a couch inside a lush green jungle.\n"
             "- VP2: One big black rectangle stands upright in front, shaped like a "
             "screen.\n"
             "- VP3: The boy's posture suggests he is watching something in front of "
             "him.\n"
             "- VP4: A logo with the text \"Internet + TV | Dive into impressions\" sits "
             "in the corner.\n"
             "- CP1: People typically face the television screen while seated.\n"
             "- CP2: Advertisements pair surprising scenes with a short slogan.\n"
             "- IC1: The ad promises entertainment and connectivity wherever you are.\n"
             "Final Conclusion: The boy is looking at a television screen.",
             "A television screen"});
    }

    {
        DatasetItem item;
        item.id = "city_billboard";
        item.image_ref = "city_billboard.ppm";
        item.question = "What product is advertised on the billboard above the street?";
        item.important_regions = {{30, 4, 36, 16}};
        item.irrelevant_regions = {{8, 46, 14, 12}};
        item.gt_step_hint = "the billboard showing a perfume bottle";
        item.topic = "city";
        item.difficulty = "hard";
        out.push_back(
            {item,
             "- VP1: A tall billboard above the street shows a perfume bottle.\n"
             "- VP2: The street below is full of evening traffic.\n"
             "- CP1: Billboards in busy streets advertise products to commuters.\n"
             "- IC1: The billboard is promoting a perfume brand to the crowd below.\n"
             "Final Conclusion: A perfume is advertised on the billboard.",
             "A perfume",
             "I cannot determine what the billboard is advertising because the relevant "
             "area of the image is covered by a black box.",
             "I cannot determine the product."});
    }

    {
        DatasetItem item;
        item.id = "garden_gnome";
        item.image_ref = "garden_gnome.ppm";
        item.question = "What creature is standing beside the watering can?";
        item.important_regions = {{14, 30, 20, 24}};
        item.gt_step_hint = "a garden gnome with a red hat";
        item.topic = "garden";
        item.difficulty = "easy";
        out.push_back(
            {item,
             "- VP1: A garden gnome with a red hat stands beside a metal watering can.\n"
             "- VP2: Flower beds line the path behind the gnome.\n"
             "- CP1: Garden gnomes are decorative figures placed among plants.\n"
             "- IC1: The scene shows a decorated garden corner with a gnome watching "
             "over it.\n"
             "Final Conclusion: A garden gnome is standing beside the watering can.",
             "A garden gnome",
             "- VP1: A dark xqzvrtw rectangle bbbbklm covers the spot beside the metal "
             "watering can.\n"
             "- VP2: Flower beds line the path behind the qqqwwrr masked area.\n"
             "- CP1: Decorative zzzzpft ornaments are common among flower beds.\n"
             "- IC1: Something decorative mmmmkx likely stood beside the watering can.\n"
             "Final Conclusion: A garden gnome is standing beside the watering can.",
             "A garden gnome"});
    }

    {
        DatasetItem item;
        item.id = "road_sign";
        item.image_ref = "road_sign.ppm";
        item.question = "What does the road sign warn about?";
        item.important_regions = {{36, 10, 24, 24}};
        out.push_back(
            {item,
             "- VP1: A yellow road sign shows a leaping deer silhouette.\n"
             "- VP2: The road behind the sign curves into a forest.\n"
             "- CP1: Yellow diamond signs warn drivers about hazards ahead.\n"
             "- IC1: The sign warns that deer may cross the road.\n"
             "Final Conclusion: The sign warns about deer crossing the road.",
             "Deer crossing",
             "- VP1: A yellow road sign stands empty with a black patch at its center.\n"
             "- VP2: The road behind the sign curves into a forest.\n"
             "- CP1: Yellow diamond signs warn drivers about hazards ahead.\n"
             "- IC1: The sign warns about some hazard, but the symbol is hidden.\n"
             "Final Conclusion: The sign warns about a hazard ahead.",
             "A road hazard"});
    }

    return out;
}

Image make_item_image(size_t index, const DatasetItem& item) {
    const int64_t w = 96, h = 64;
    auto channel = [&](int64_t base, int64_t step) {
        return static_cast<unsigned char>(40 + (base + step * static_cast<int64_t>(index)) % 180);
    };
    Image img = Image::solid(w, h, channel(60, 37), channel(110, 53), channel(160, 71));
    // The annotated object: a contrasting block inside the important region,
    // so masking visibly changes pixels.
    for (const auto& box : item.important_regions)
        img.fill_rect(box, channel(220, 13), channel(30, 97), channel(90, 41));
    for (const auto& box : item.irrelevant_regions)
        img.fill_rect(box, channel(10, 89), channel(200, 29), channel(140, 59));
    return img;
}

}  // namespace

Bundle generate_bundle(const std::filesystem::path& out_dir, Mode mode,
                       uint64_t mask_seed) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir / "images", ec);
    if (!fs::exists(out_dir / "images"))
        throw Error("out-dir-unwritable", out_dir.string());

    auto all = scenarios();
    std::vector<DatasetItem> items;
    json entries = json::array();

    auto add_entry = [&](const std::vector<unsigned char>& image_ppm,
                         const std::string& prompt, const std::string& text) {
        entries.push_back({{"image_hash", sha256_hex(std::span<const unsigned char>(image_ppm))},
                           {"prompt_hash", sha256_hex(prompt)},
                           {"text", text}});
    };

    for (size_t i = 0; i < all.size(); ++i) {
        const Scenario& sc = all[i];
        items.push_back(sc.item);
        Image original = make_item_image(i, sc.item);
        save_image(original, out_dir / "images" / sc.item.image_ref);
        auto original_ppm = encode_ppm(original);
        auto specific_ppm =
            encode_ppm(mask_specific(original, sc.item.important_regions).image);
        auto random_ppm =
            encode_ppm(mask_random(original, sc.item.important_regions,
                                   derive_item_seed(mask_seed, sc.item.id))
                           .image);

        std::string masked_cot = sc.masked_cot;
        std::string masked_answer = sc.masked_answer;
        std::string random_cot = sc.baseline_cot;  // Normal: control masks are benign
        std::string random_answer = sc.baseline_answer;
        if (mode == Mode::Identity) {
            masked_cot = sc.baseline_cot;
            masked_answer = sc.baseline_answer;
        } else if (mode == Mode::Scrambled) {
            masked_cot = kScrambledCot;
            masked_answer = kScrambledAnswer;
            random_cot = kScrambledCot;
            random_answer = kScrambledAnswer;
        }

        const std::string question = sc.item.question;
        add_entry(original_ppm, prompts::build_cot_prompt(question), sc.baseline_cot);
        add_entry(original_ppm, prompts::build_answer_prompt(question, false),
                  sc.baseline_answer);
        add_entry(specific_ppm, prompts::build_cot_prompt(question), masked_cot);
        add_entry(specific_ppm, prompts::build_answer_prompt(question, true), masked_answer);
        add_entry(random_ppm, prompts::build_cot_prompt(question), random_cot);
        add_entry(random_ppm, prompts::build_answer_prompt(question, true), random_answer);
    }

    Bundle bundle;
    bundle.dataset_path = out_dir / "dataset.jsonl";
    bundle.images_dir = out_dir / "images";
    bundle.fixtures_path = out_dir / "mock_fixtures.json";
    bundle.item_count = items.size();

    save_dataset(items, bundle.dataset_path);
    json fixture_doc = {{"format_version", 1},
                        {"mask_seed", mask_seed},
                        {"entries", entries}};
    write_file_atomic(bundle.fixtures_path, fixture_doc.dump(2) + "\n");
    return bundle;
}

}  // namespace crm::fixtures
