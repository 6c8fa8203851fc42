#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "helpers.hpp"
#include "nldst/backend.hpp"
#include "nldst/harness.hpp"

using namespace nldst;
using nldst::testing::fixture_path;
using nldst::testing::one_user_turn;
using nldst::testing::ontology;
using nldst::testing::rules;
using nldst::testing::templates;
using nldst::testing::train_state;

namespace {

// local stub server; handler decides the response per request
class StubServer {
  public:
    explicit StubServer(httplib::Server::Handler handler) {
        server_.Post("/generate", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

BackendSpec http_spec(const std::string& endpoint) {
    BackendSpec spec;
    spec.kind = BackendKind::external_http;
    spec.endpoint = endpoint;
    spec.timeout_s = 0.5;
    spec.max_retries = 2;
    spec.backoff_ms = 10;
    return spec;
}

GenerationRequest sample_request() {
    GenerationRequest req;
    req.prompt = "user: hello state:";
    req.max_tokens = 16;
    req.top_p = 0.9;
    req.stop = {"<eos>"};
    req.request_id = "d1#0";
    return req;
}

}  // namespace

TEST_CASE("render_prompt and turn_request_id formats") {
    DialogueHistory h = one_user_turn("dlg-7", "i need a train");
    CHECK(render_prompt(h) == "user: i need a train state:");
    CHECK(turn_request_id(h) == "dlg-7#0");

    Turn sys;
    sys.speaker = Speaker::system;
    sys.utterance = tokenize("ok");
    sys.turn_index = 1;
    h.turns.push_back(sys);
    CHECK(render_prompt(h) == "user: i need a train <sep> system: ok state:");
    CHECK(turn_request_id(h) == "dlg-7#1");
}

TEST_CASE("structured record grammar round trip") {
    StructuredState s = train_state();
    s.set("restaurant", "food", "italian");
    auto tokens = linearize_structured(s);
    auto back = parse_structured_tokens(tokens, ontology());
    REQUIRE(back.has_value());
    CHECK(state_equal(*back, s));

    auto single = parse_structured_text("train-departure: london kings cross", ontology());
    REQUIRE(single.has_value());
    CHECK(single->get("train", "departure") == "london kings cross");

    auto multi = parse_structured_text("train-day: monday\nrestaurant-food: italian", ontology());
    REQUIRE(multi.has_value());
    CHECK(multi->size() == 2);

    CHECK(parse_structured_tokens({}, ontology())->empty());
    CHECK_FALSE(parse_structured_text("no colons here", ontology()).has_value());
    CHECK_FALSE(parse_structured_text("bogus-slot: value", ontology()).has_value());
    CHECK_FALSE(parse_structured_text("train-day: not a weekday", ontology()).has_value());
}

TEST_CASE("structured parser survives random bytes") {
    Rng rng(61);
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        size_t len = rng.below(64);
        for (size_t i = 0; i < len; ++i)
            text.push_back(static_cast<char>(rng.below(256)));
        auto out = parse_structured_text(text, ontology());
        if (out) ontology().validate(*out);
    }
}

TEST_CASE("http backend happy path echoes the request id") {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        nlohmann::json reply{{"request_id", body.at("request_id")},
                             {"text", "user wants a restaurant serving italian food"},
                             {"finish_reason", "stop"}};
        res.set_content(reply.dump(), "application/json");
    });
    HttpBackend backend(http_spec(server.endpoint()));
    GenerationResponse res = backend.generate(sample_request());
    CHECK(res.finish_reason == FinishReason::stop);
    CHECK(res.request_id == "d1#0");
    CHECK(res.text == "user wants a restaurant serving italian food");
}

TEST_CASE("http backend retries on echo mismatch then degrades") {
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        nlohmann::json reply{{"request_id", "wrong-id"}, {"text", "x"}, {"finish_reason", "stop"}};
        res.set_content(reply.dump(), "application/json");
    });
    BackendSpec spec = http_spec(server.endpoint());
    spec.max_retries = 2;
    HttpBackend backend(spec);
    GenerationResponse res = backend.generate(sample_request());
    CHECK(res.finish_reason == FinishReason::error);
    CHECK(calls == 3);  // initial attempt plus two retries
}

TEST_CASE("http backend times out, retries, and degrades to an error") {
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(700));
        res.set_content("{}", "application/json");
    });
    BackendSpec spec = http_spec(server.endpoint());
    spec.timeout_s = 0.2;
    spec.max_retries = 1;
    HttpBackend backend(spec);
    GenerationResponse res = backend.generate(sample_request());
    CHECK(res.finish_reason == FinishReason::error);
    CHECK(calls >= 1);
}

TEST_CASE("timed-out turns degrade to recorded empty-state predictions") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(700));
        res.set_content("{}", "application/json");
    });
    BackendSpec spec = http_spec(server.endpoint());
    spec.timeout_s = 0.2;
    spec.max_retries = 1;
    StateGenerator gen(spec, ontology(), rules());
    gen.bind_backend(std::make_shared<HttpBackend>(spec));

    std::vector<std::string> failures;
    TurnPrediction pred =
        gen.generate_state(one_user_turn("d9", "i need a train"), DecodeConfig{}, &failures);
    CHECK(pred.error);
    CHECK(pred.predicted_structured.empty());
    CHECK(pred.dialogue_id == "d9");
    REQUIRE(failures.size() == 1);
}

TEST_CASE("canned backend parses the scripted train sentence") {
    BackendSpec spec;
    spec.kind = BackendKind::mock_canned;
    StateGenerator gen(spec, ontology(), rules());
    gen.bind_backend(std::make_shared<CannedBackend>(
        CannedBackend::load(fixture_path("canned_responses.json"))));

    TurnPrediction pred =
        gen.generate_state(one_user_turn("canned-1", "any text"), DecodeConfig{});
    CHECK_FALSE(pred.error);
    CHECK(state_equal(pred.predicted_structured, train_state()));
    REQUIRE(pred.predicted_nl.has_value());

    TurnPrediction miss = gen.generate_state(one_user_turn("unknown", "x"), DecodeConfig{});
    CHECK(miss.error);
}

TEST_CASE("oracle backend reproduces gold exactly") {
    Corpus c = generate_synthetic_corpus(ontology(), templates(), 10, 7);
    BackendSpec spec;
    spec.kind = BackendKind::mock_oracle;
    StateGenerator gen(spec, ontology(), rules());
    gen.bind_backend(std::make_shared<OracleBackend>(c));

    for (const auto& ex : c.examples) {
        TurnPrediction pred = gen.generate_state(ex.history, DecodeConfig{});
        CHECK_FALSE(pred.error);
        CHECK(state_equal(pred.predicted_structured, ex.gold_structured));
        REQUIRE(pred.predicted_nl.has_value());
        CHECK(*pred.predicted_nl == ex.gold_nl);
    }
}

TEST_CASE("structured output mode parses records and logs failures") {
    BackendSpec spec;
    spec.kind = BackendKind::mock_canned;
    spec.output_mode = OutputMode::structured;
    StateGenerator gen(spec, ontology(), rules());
    gen.bind_backend(std::make_shared<CannedBackend>(std::map<std::string, std::string>{
        {"ok#0", "train-day: monday ; restaurant-food: italian"},
        {"bad#0", "complete garbage output"}}));

    TurnPrediction good = gen.generate_state(one_user_turn("ok", "x"), DecodeConfig{});
    CHECK(good.predicted_structured.size() == 2);
    CHECK_FALSE(good.predicted_nl.has_value());

    std::vector<std::string> failures;
    TurnPrediction bad = gen.generate_state(one_user_turn("bad", "x"), DecodeConfig{}, &failures);
    CHECK(bad.predicted_structured.empty());
    CHECK(failures.size() == 1);
}

TEST_CASE("backend spec validation") {
    BackendSpec spec;
    spec.kind = BackendKind::external_http;
    CHECK_THROWS(spec.check());  // endpoint required
    spec.endpoint = "http://127.0.0.1:9";
    spec.timeout_s = 0.0;
    CHECK_THROWS(spec.check());
    spec.timeout_s = 1.0;
    spec.max_retries = -1;
    CHECK_THROWS(spec.check());
}
