#include "captionprobe/error.hpp"
#include "captionprobe/textproc.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace captionprobe {
namespace {

using Strings = std::vector<std::string>;
using Tags = std::vector<Upos>;

class ToyTagger : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        corpus_ = new std::vector<TaggedSentence>(read_treebank(testing::data_path("treebank/toy.conllu")));
        model_ = new TaggerModel(train_tagger(*corpus_, 5, 1));
    }
    static void TearDownTestSuite() {
        delete model_;
        delete corpus_;
    }
    static std::vector<TaggedSentence> *corpus_;
    static TaggerModel *model_;
};

std::vector<TaggedSentence> *ToyTagger::corpus_ = nullptr;
TaggerModel *ToyTagger::model_ = nullptr;

TEST_F(ToyTagger, TreebankHasFiftySentences) { EXPECT_EQ(corpus_->size(), 50u); }

TEST_F(ToyTagger, TrainingSetAccuracyAtLeastNinetyFivePercent) {
    EXPECT_GE(tagging_accuracy(*model_, *corpus_), 0.95);
}

TEST_F(ToyTagger, TagsTheDogBarks) {
    const Strings words = {"the", "dog", "barks"};
    EXPECT_EQ(model_->tag(words), (Tags{Upos::DET, Upos::NOUN, Upos::VERB}));
}

TEST_F(ToyTagger, TagsASingleKnownNoun) {
    const Strings words = {"dog"};
    EXPECT_EQ(model_->tag(words), (Tags{Upos::NOUN}));
}

TEST_F(ToyTagger, SameInputTwiceGivesSameOutput) {
    const Strings words = {"a", "man", "is", "cooking", "in", "the", "kitchen"};
    EXPECT_EQ(model_->tag(words), model_->tag(words));
}

TEST_F(ToyTagger, SerializedModelTagsIdentically) {
    const auto reloaded = TaggerModel::from_json(model_->to_json());
    EXPECT_EQ(reloaded.to_json(), model_->to_json());
    EXPECT_EQ(reloaded.iterations(), 5);
    EXPECT_EQ(reloaded.seed(), 1u);
    EXPECT_EQ(reloaded.corpus_digest(), model_->corpus_digest());
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto cap = testing::random_caption(rng, "r");
        Strings words;
        for (const auto &t : cap.tokens) words.push_back(t.surface);
        if (words.empty()) continue;
        EXPECT_EQ(reloaded.tag(words), model_->tag(words));
    }
}

TEST_F(ToyTagger, SaveAndLoadThroughAFile) {
    testing::TempDir dir("tagger");
    model_->save(dir / "model.json");
    const auto loaded = TaggerModel::load(dir / "model.json");
    const Strings words = {"the", "old", "dog", "barks", "loudly"};
    EXPECT_EQ(loaded.tag(words), model_->tag(words));
}

TEST_F(ToyTagger, TrainingIsDeterministicGivenTheSeed) {
    const auto again = train_tagger(*corpus_, 5, 1);
    EXPECT_EQ(again.to_json(), model_->to_json());
}

TEST_F(ToyTagger, TagCaptionTokenizesAndCategorizes) {
    const auto cap = tag_caption(*model_, "c1", "v1", "the dog barks!");
    ASSERT_EQ(cap.tokens.size(), 4u);
    EXPECT_EQ(cap.tokens[1].category, Category::ObjectAttribute);
    EXPECT_EQ(cap.tokens[2].category, Category::Action);
    EXPECT_EQ(cap.tokens[3].surface, "!");
}

TEST(Tagger, SingleRepeatedSentenceIsMemorizedInOneIteration) {
    const TaggedSentence s{{"a", "guy", "drives", "a", "car"}, {Upos::DET, Upos::NOUN, Upos::VERB, Upos::DET, Upos::NOUN}};
    const std::vector<TaggedSentence> corpus(8, s);
    const auto model = train_tagger(corpus, 1, 0);
    EXPECT_EQ(model.tag(s.words), s.tags);
}

TEST(Tagger, SingleTagCorpusTagsEverythingWithThatTag) {
    const std::vector<TaggedSentence> corpus = {{{"dog", "cat"}, {Upos::NOUN, Upos::NOUN}},
                                                {{"car"}, {Upos::NOUN}}};
    const auto model = train_tagger(corpus, 3, 0);
    const Strings unseen = {"the", "quickly", "running", ",", "dog"};
    EXPECT_EQ(model.tag(unseen), Tags(unseen.size(), Upos::NOUN));
    EXPECT_EQ(model.tags(), (Tags{Upos::NOUN}));
}

TEST(Tagger, EmptyCorpusIsAnError) {
    try {
        train_tagger({}, 5, 0);
        FAIL() << "expected a DataError";
    } catch (const DataError &e) {
        EXPECT_STREQ(e.what(), "empty training corpus");
    }
    const std::vector<TaggedSentence> blank = {{{}, {}}};
    EXPECT_THROW(train_tagger(blank, 5, 0), DataError);
}

TEST(Tagger, ZeroIterationsIsAUsageError) {
    const std::vector<TaggedSentence> corpus = {{{"dog"}, {Upos::NOUN}}};
    EXPECT_THROW(train_tagger(corpus, 0, 0), UsageError);
}

TEST(Tagger, UntrainedModelRefusesToTag) {
    const TaggerModel model;
    const Strings words = {"dog"};
    EXPECT_TRUE(model.empty());
    EXPECT_THROW(model.tag(words), DataError);
}

TEST(Tagger, MalformedModelJsonIsADataError) {
    EXPECT_THROW(TaggerModel::from_json("{}"), DataError);
    EXPECT_THROW(TaggerModel::from_json("not json"), DataError);
}

TEST(Treebank, ReadsConlluSkippingMultiwordAndEmptyNodes) {
    std::istringstream in("# text = don't go\n1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n1\tdo\tdo\tAUX\t_\t_\t_\t_\t_\t_\n"
                          "2\tn't\tnot\tPART\t_\t_\t_\t_\t_\t_\n2.1\tx\t_\tX\t_\t_\t_\t_\t_\t_\n"
                          "3\tgo\tgo\tVERB\t_\t_\t_\t_\t_\t_\n\n");
    const auto corpus = parse_treebank(in);
    ASSERT_EQ(corpus.size(), 1u);
    EXPECT_EQ(corpus[0].words, (Strings{"do", "n't", "go"}));
    EXPECT_EQ(corpus[0].tags, (Tags{Upos::AUX, Upos::PART, Upos::VERB}));
}

TEST(Treebank, ReadsTwoColumnLayout) {
    std::istringstream in("# id = s1\ndog\tNOUN\nruns\tVERB\n\ncat\tNOUN\n");
    const auto corpus = parse_treebank(in);
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus[1].words, (Strings{"cat"}));
}

TEST(Treebank, UnknownTagIsADataError) {
    std::istringstream in("1\tdog\t_\tNN\t_\t_\t_\t_\t_\t_\n");
    EXPECT_THROW(parse_treebank(in), DataError);
}

TEST(Treebank, TrainingSliceStaysUnderTenThousandTokens) {
    const auto train = read_treebank(testing::data_path("treebank/train.conllu"));
    const auto heldout = read_treebank(testing::data_path("treebank/heldout.conllu"));
    std::size_t tokens = 0;
    for (const auto &s : train) tokens += s.words.size();
    EXPECT_LE(tokens, 10000u);
    EXPECT_FALSE(heldout.empty());
}

} // namespace
} // namespace captionprobe
