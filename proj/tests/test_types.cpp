#include <doctest.h>

#include <set>
#include <string>

#include "cetsim/types.hpp"

using namespace cetsim;

TEST_CASE("modality tags round-trip in canonical order") {
    CHECK(modality_tag(Modality::RfPower) == 'P');
    CHECK(modality_tag(Modality::Image) == 'I');
    CHECK(modality_tag(Modality::PointCloud) == 'C');
    CHECK(modality_tag(Modality::MmWave) == 'M');
    for (Modality m : kAllModalities) {
        auto back = modality_from_tag(modality_tag(m));
        REQUIRE(back.has_value());
        CHECK(*back == m);
    }
    CHECK(!modality_from_tag('X').has_value());
    CHECK(!modality_from_tag('p').has_value());
}

TEST_CASE("the variant set is closed with exactly seven members") {
    const auto& all = ModeVariant::all();
    REQUIRE(all.size() == 7);
    std::set<std::string> names;
    for (ModeVariant v : all) names.insert(std::string(v.name()));
    CHECK(names == std::set<std::string>{"GFM", "CRM(P+I+C)", "CRM(P+I+M)", "CRM(P+C+M)",
                                         "PIM(P+I)", "PIM(P+C)", "PIM(P+M)"});
}

TEST_CASE("variant names parse back to the same variant") {
    for (ModeVariant v : ModeVariant::all()) {
        auto parsed = ModeVariant::parse(v.name());
        REQUIRE(parsed.has_value());
        CHECK(*parsed == v);
    }
    CHECK(!ModeVariant::parse("PIM(P+X)").has_value());
    CHECK(!ModeVariant::parse("CRM").has_value());
    CHECK(!ModeVariant::parse("").has_value());
    CHECK(!ModeVariant::parse("gfm").has_value());
}

TEST_CASE("variant modality sets are canonical") {
    auto mods = [](const char* name) {
        auto v = ModeVariant::parse(name);
        REQUIRE(v.has_value());
        auto span = variant_modalities(*v);
        return std::vector<Modality>(span.begin(), span.end());
    };
    CHECK(mods("GFM") == std::vector<Modality>{Modality::RfPower, Modality::Image,
                                               Modality::PointCloud, Modality::MmWave});
    CHECK(mods("CRM(P+I+M)") ==
          std::vector<Modality>{Modality::RfPower, Modality::Image, Modality::MmWave});
    CHECK(mods("PIM(P+C)") == std::vector<Modality>{Modality::RfPower, Modality::PointCloud});

    for (ModeVariant v : ModeVariant::all()) {
        auto span = v.modalities();
        // Strictly ascending in the canonical P<I<C<M order, always with P.
        REQUIRE(!span.empty());
        CHECK(span.front() == Modality::RfPower);
        for (std::size_t i = 1; i < span.size(); ++i)
            CHECK(static_cast<int>(span[i - 1]) < static_cast<int>(span[i]));
        for (Modality m : span) CHECK(v.has_modality(m));
    }
}

TEST_CASE("modes and communication load ranks") {
    CHECK(ModeVariant::parse("GFM")->mode() == Mode::GFM);
    CHECK(ModeVariant::parse("CRM(P+C+M)")->mode() == Mode::CRM);
    CHECK(ModeVariant::parse("PIM(P+I)")->mode() == Mode::PIM);
    CHECK(communication_load_rank(Mode::GFM) == 3);
    CHECK(communication_load_rank(Mode::CRM) == 2);
    CHECK(communication_load_rank(Mode::PIM) == 1);
    CHECK(communication_load_rank(Mode::PIM) < communication_load_rank(Mode::CRM));
    CHECK(communication_load_rank(Mode::CRM) < communication_load_rank(Mode::GFM));
}

TEST_CASE("scenario names round-trip") {
    CHECK(scenario_name(Scenario::Daytime) == "Daytime");
    CHECK(scenario_name(Scenario::Nighttime) == "Nighttime");
    CHECK(scenario_from_name("Daytime") == Scenario::Daytime);
    CHECK(scenario_from_name("Nighttime") == Scenario::Nighttime);
    CHECK(!scenario_from_name("Dusk").has_value());
}

TEST_CASE("link spec connectivity is symmetric") {
    LinkSpec l;
    l.a = NodeId{1};
    l.b = NodeId{2};
    CHECK(l.connects(NodeId{1}, NodeId{2}));
    CHECK(l.connects(NodeId{2}, NodeId{1}));
    CHECK(!l.connects(NodeId{1}, NodeId{3}));
}
