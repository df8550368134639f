// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

/**
 * @file desk_corpus.hpp
 * @brief Seeded synthetic financial-services intent corpus.
 *
 * Patterns use "(a|b|c)" groups; each group is replaced by one alternative
 * drawn at random and an empty alternative makes the group optional.
 * Out-of-scope questions share the filler vocabulary but not the domain words.
 */

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "escalada/bench/dataset.hpp"
#include "escalada/detail/rng.hpp"
#include "escalada/detail/text.hpp"
#include "escalada/error.hpp"

namespace escalada::bench {

struct IntentSpec {
  std::string_view tier1;
  std::string_view tier2;
  std::string_view tier3;
  std::vector<std::string_view> patterns;
};

inline const std::vector<IntentSpec>& desk_intents() {
  static const std::vector<IntentSpec> intents = {
      {"banking", "accounts", "check_balance",
       {"(check|see|view|show) my (account|checking|savings) balance",
        "how much (money|cash) is (in|left in) my (account|checking|savings) (after {merchant}|)",
        "what is my (current|available|remaining) balance",
        "(balance|funds) (available|remaining) in (checking|savings)"}},
      {"banking", "accounts", "open_account",
       {"(open|start|create) a (new|) (savings|checking|joint) account",
        "how (do|can) i open (an|a new) account",
        "i (want|would like) to (open|create) (a|another) (savings|checking|custodial) account"}},
      {"banking", "accounts", "close_account",
       {"(close|terminate|shut down) my (savings|checking|joint) account",
        "how (do|can) i close (my|an) account",
        "i (have|need help with) a question about my (savings|checking) account",
        "i (want|need) to (close|cancel) my account (permanently|today|)"}},
      {"banking", "transfers", "transfer_funds",
       {"(transfer|move|send) (money|funds|cash) (to|into) my (savings|checking|brokerage) account",
        "(transfer|move) (funds|money) between (my|) accounts",
        "move {amount} (from checking to savings|from savings to checking|to my other account)",
        "how (do|can) i transfer (money|funds) (to|into) (savings|checking)"}},
      {"banking", "transfers", "wire_international",
       {"(send|initiate) an international wire (transfer|payment)",
        "wire (money|funds) (abroad|overseas|internationally)",
        "how (do|can) i (wire|send) (money|funds) to (europe|canada|mexico|another country|{place})",
        "wire {amount} to {person} in {place}",
        "what is the swift code for (international|foreign) wires"}},
      {"banking", "transfers", "stop_payment",
       {"(stop|cancel|block) (payment|a payment) on a (check|cheque)",
        "(place|put) a stop payment on (check|cheque) (number|) (1042|2210|)",
        "stop the (check|cheque) i wrote to {person} (on {day}|last week|)",
        "how (do|can) i stop a (check|cheque) (payment|) from clearing"}},
      {"banking", "deposits", "direct_deposit",
       {"(set up|setup|change|update) (my|) direct deposit",
        "my (employer|new job|company) {merchant} needs (my|the) direct deposit (details|info|form)",
        "where (do|can) i find (my|the) direct deposit (form|information)",
        "(routing|account) number for direct deposit (setup|form|)"}},
      {"banking", "deposits", "mobile_deposit",
       {"(deposit|cash) a (check|cheque) (using|with|from) (my|the) (phone|mobile app|camera)",
        "mobile (check|cheque) deposit (limit|not working|pending|)",
        "how (do|can) i (photograph|scan) a (check|cheque) to deposit (it|)"}},
      {"banking", "fees", "overdraft_fee",
       {"(why|how) was i charged an overdraft (fee|charge)",
        "(refund|waive|reverse) (the|my) overdraft (fee|charge)",
        "overdraft fee after (my|the) {merchant} (payment|purchase) (on {day}|)",
        "overdraft (protection|fee|charge) on my (checking|account)"}},
      {"cards", "card_services", "report_lost_card",
       {"(report|block|freeze) (my|a) (lost|stolen|missing) (card|debit card|credit card)",
        "my (card|wallet|debit card) (was|got) (stolen|lost)",
        "(question|problem) (about|with) my card",
        "i (lost|misplaced) my (credit card|debit card|card) (yesterday|today|)"}},
      {"cards", "card_services", "activate_card",
       {"(activate|enable) my (new|replacement) (card|credit card|debit card)",
        "how (do|can) i activate (my|the) (card|new card)",
        "my new card (needs|requires) activation",
        "(question|problem) (about|with) my (new|) card"}},
      {"cards", "card_services", "increase_credit_limit",
       {"(increase|raise|extend) my (credit|spending) limit",
        "(request|ask for) a (higher|larger) credit limit",
        "can (you|i) (increase|raise) the limit on my (credit card|card)"}},
      {"cards", "disputes", "dispute_charge",
       {"(dispute|contest|challenge) a (charge|transaction|purchase) (from {merchant}|on my card|on my statement)",
        "there is a (charge|transaction) (i do not recognize|i did not make) on my (card|statement)",
        "(unauthorized|fraudulent|unknown) (charge|transaction) on my (statement|account)",
        "i never (bought|ordered) anything from {merchant} (but|and) (they|it) charged me {amount}"}},
      {"cards", "disputes", "travel_notice",
       {"(set|add|place) a travel (notice|notification|alert) (on|for) my (card|cards)",
        "i am (traveling|travelling) to ({place}|france|japan|brazil|italy) (next week|soon|on {day}|)",
        "(notify|tell) (you|the bank) (about|of) my (travel|trip) (plans|abroad|)"}},
      {"lending", "mortgage", "apply_mortgage",
       {"(apply|qualify) for a (mortgage|home loan) (preapproval|)",
        "(start|begin) a (mortgage|home loan) application",
        "what (documents|paperwork) (do i need|are required) for a (mortgage|home loan)"}},
      {"lending", "mortgage", "refinance_mortgage",
       {"(refinance|refi) my (mortgage|home loan)",
        "(should|can) i refinance (my mortgage|at a lower rate)",
        "(current|today's) (refinance|refi) (rates|rate) for (mortgages|home loans|)"}},
      {"lending", "loans", "loan_payoff",
       {"(what is|get) my (auto|car|personal) loan payoff (amount|quote)",
        "(pay off|payoff) my (auto|car|personal|student) loan (early|today|)",
        "how much (do i owe|is left) on my (auto|car|personal) loan"}},
      {"lending", "loans", "interest_rate",
       {"what is the (interest|annual percentage) rate on (savings|my loan|personal loans|cds)",
        "(current|today's) (interest|savings|cd) rates",
        "(question|problem) (about|with) my (savings|loan)",
        "how much interest (does|will) my (savings|cd|money market) (earn|pay)"}},
      {"investing", "retirement", "retirement_contribution",
       {"(increase|change|update) my 401k (contribution|contributions|deferral)",
        "how much (can|should) i contribute to my (401k|403b|retirement plan)",
        "(change|update) (my|the) (401k|retirement) contribution (percentage|rate|amount)"}},
      {"investing", "retirement", "rollover_ira",
       {"(rollover|roll over|move) my (old|previous|former) 401k (into|to) an IRA",
        "how (do|can) i (rollover|roll over) (a|my) 401k",
        "(transfer|roll) my (pension|retirement) (savings|plan) (into|to) (an|my) IRA"}},
      {"investing", "retirement", "beneficiary_update",
       {"(update|change|add) (the|my) beneficiary (on|for) my (account|IRA|policy)",
        "(name|designate|add) (a|my) (spouse|daughter|son|friend {person}) as beneficiary",
        "who is listed as (the|my) beneficiary (on|for) my (account|IRA|)"}},
      {"investing", "brokerage", "buy_stock",
       {"(buy|purchase) (shares|stock) (of|in) (apple|tesla|microsoft|amazon|an index fund|{merchant})",
        "(place|submit|enter) a (buy|limit|market) order (for|on) (shares|stock)",
        "how (do|can) i (buy|trade) (stocks|shares|etfs) in my brokerage (account|)"}},
      {"investing", "brokerage", "dividend_reinvestment",
       {"(enable|turn on|set up|stop) dividend reinvestment",
        "(reinvest|automatically reinvest) (my|the) dividends",
        "(how|when) are (my|) dividends (reinvested|paid out|paid)"}},
      {"tax", "tax_documents", "tax_forms",
       {"where (is|can i find|do i get) my (1099|1099b|1098|tax form|tax forms)",
        "(download|send me|mail me) my (1099|1099b|1098|tax) (forms|documents|form)",
        "when will (my|the) (1099|tax forms|tax documents) be (available|ready|mailed)"}},
      {"tax", "tax_documents", "tax_withholding",
       {"(change|update|adjust) my (federal|state|tax) withholding",
        "how much tax (is|was) withheld from my (distribution|withdrawal|paycheck)",
        "(stop|increase|reduce) (tax|federal) withholding on my (distribution|withdrawal|ira)"}},
      {"security", "access", "reset_password",
       {"(reset|change|recover) my (online banking|account|) password",
        "(i forgot|forgot) my (password|username|login)",
        "(locked|locked out) of my (online|) (account|banking)"}},
      {"security", "access", "update_address",
       {"(update|change) my (mailing|home|billing) address",
        "i (moved|am moving) (and|so) (need|want) to update my address",
        "(change|update) (the|my) address on (file|my account)"}},
      {"security", "fraud", "fraud_alert",
       {"(place|set|add) a fraud alert on my (account|accounts|credit)",
        "(suspicious|strange|weird) (activity|login|logins) on my (account|accounts)",
        "i (think|believe) my (account|identity) (was|has been) (compromised|hacked|stolen)"}},
      {"cards", "card_services", "replace_card",
       {"(replace|reissue) my (damaged|broken|worn|cracked) (card|debit card|credit card)",
        "my (card|chip) (stopped working|is damaged|is broken|will not read)",
        "(order|request|send me) a (new|replacement) (card|debit card) (because mine is damaged|)"}},
      {"cards", "card_services", "card_declined",
       {"(why|how come) was my (card|debit card|credit card) declined (at {merchant}|today|)",
        "my (card|payment) (keeps getting|got|was) declined (at {merchant}|online|)",
        "(declined|rejected) (transaction|purchase|payment) (at {merchant}|on my card)"}},
      {"banking", "transfers", "transfer_status",
       {"(where|what happened to) (is|) my (transfer|wire|payment) (to {person}|)",
        "(my|the) (transfer|wire) (to {person}|) (has not arrived|is still pending|never arrived)",
        "(track|check) the status of my (transfer|wire) (to {place}|to {person}|)"}},
      {"banking", "accounts", "account_statement",
       {"(download|view|get|print) my (monthly|last|latest|bank) statement",
        "where (can i find|is) my (account|checking|savings) statement (for {day}|)",
        "(send|mail|email) me (a copy of|) my (bank|account) statement"}},
      {"lending", "loans", "loan_payment",
       {"(make|schedule|set up) a (payment|loan payment) on my (auto|car|personal|student) loan",
        "(pay|autopay) my (auto|car|personal) loan (bill|installment) (on {day}|this month|)",
        "when is my (next|monthly) (loan|auto loan|car loan) payment due"}},
      {"security", "access", "update_phone",
       {"(update|change) my (phone|mobile|cell) number (on file|on my account|)",
        "i (got|have) a new (phone|mobile) number",
        "(add|remove) a phone number (for|from) (two factor|verification|my account)"}},
  };
  return intents;
}

inline const std::vector<std::string_view>& desk_openers() {
  static const std::vector<std::string_view> v = {"", "", "", "please", "hi", "hello", "can you help me", "i need to",
                                                  "quick question", "help", "hey", "excuse me"};
  return v;
}

inline const std::vector<std::string_view>& desk_closers() {
  static const std::vector<std::string_view> v = {"", "", "", "please", "thanks", "thank you", "today", "right now",
                                                  "asap", "for me", "online", "from my phone"};
  return v;
}

inline const std::vector<std::string_view>& out_of_scope_patterns() {
  static const std::vector<std::string_view> v = {
      "what is a (hippopotamus|platypus|narwhal|giraffe|wombat|flamingo|axolotl|pangolin)",
      "how (tall|old|big|heavy) is the (eiffel tower|statue of liberty|great wall|empire state building|golden gate bridge)",
      "(give me|find|share) a recipe for (lasagna|pancakes|guacamole|risotto|banana bread|chili|sushi|paella)",
      "how many calories (are|) in (an avocado|a banana|a bagel|pizza|ice cream|a croissant)",
      "what's the weather (like|forecast|) in (paris|tokyo|chicago|denver|seattle|boston|madrid)",
      "who won the (world cup|super bowl|world series|stanley cup|tour de france) (last year|in 2018|)",
      "(play|put on|queue) (some|) (jazz|rock|classical|country|reggae) music",
      "set an alarm for (six|seven|eight|nine) (am|pm|tomorrow)",
      "translate (hello|goodbye|thank you|good night) (to|into) (spanish|german|french|swahili|korean)",
      "tell me a joke about (penguins|cats|dogs|pirates|robots|dinosaurs)",
      "how do (airplanes|volcanoes|rainbows|magnets|tides|earthquakes) (work|form|happen)",
      "(who|what) (invented|discovered) (the telephone|penicillin|gravity|the lightbulb|electricity)",
      "how (do i|to|can i) (bake|cook|grill|roast) a (turkey|salmon|steak|pumpkin pie|chicken)",
      "what (movies|shows|concerts|plays) are (playing|showing|on) (tonight|this weekend|nearby)",
      "how far is the (moon|sun|mars|nearest star) from (earth|here)",
      "recommend a (novel|podcast|board game|hiking trail|restaurant) (for me|nearby|to try|)",
      "what is the capital of (peru|kenya|norway|vietnam|australia|portugal|egypt)",
      "how (do i|to|can i) (fix|repair|unclog) (a leaky faucet|my bicycle|the dishwasher|a flat tire)",
      "book a (table|flight|hotel room|haircut) for (tonight|tomorrow|friday|two people)",
      "(why|how) do (cats purr|birds migrate|leaves change color|bees make honey|owls hoot)",
      "what time does {merchant} (open|close) (on {day}|today|)",
      "(directions|how to get) to {place} from (here|the airport)",
      "is {person} (coming|free) (on {day}|tonight|)",
      "(does|can) {merchant} (deliver|ship) to {place}",
  };
  return v;
}

/// Long-tail filler lists for "{name}" slots.
inline const std::vector<std::string_view>& desk_slot(std::string_view name) {
  static const std::vector<std::string_view> merchant = {
      "amazon", "walmart", "target", "costco", "starbucks", "uber", "netflix", "spotify", "doordash", "chipotle",
      "kroger", "safeway", "walgreens", "ikea", "etsy", "ebay", "paypal", "venmo", "airbnb", "expedia",
      "hilton", "marriott", "hulu", "peloton", "sephora", "nordstrom", "macys", "zappos", "wayfair", "instacart",
      "grubhub", "dunkin", "wendys", "panera", "aldi", "publix", "hertz", "avis", "verizon", "comcast",
      "geico", "progressive", "bestbuy", "homedepot", "lowes", "staples", "chewy", "petco", "lyft", "shell",
      "exxon", "chevron", "sunoco", "wegmans", "meijer", "heb", "trader joes", "whole foods", "gamestop", "ulta",
      "rei", "patagonia", "lululemon", "crate and barrel", "williams sonoma", "overstock", "newegg", "bjs",
      "sams club", "dollar tree", "five guys", "shake shack", "sweetgreen", "blue apron", "hellofresh"};
  static const std::vector<std::string_view> person = {
      "maria", "james", "priya", "wei", "ahmed", "olga", "carlos", "fatima", "john", "aisha", "mateo", "yuki",
      "sofia", "liam", "chen", "amara", "noah", "ingrid", "raj", "elena", "tomasz", "zainab", "kofi", "hannah",
      "diego", "mei", "oluwaseun", "svetlana", "giovanni", "nadia", "bjorn", "lucia", "tariq", "keiko", "pablo",
      "ravi", "ines", "dmitri", "chiara", "emeka", "astrid", "joaquin", "leila", "haruto", "anneliese"};
  static const std::vector<std::string_view> place = {
      "london", "toronto", "mumbai", "manila", "lagos", "berlin", "lisbon", "seoul", "sydney", "dublin",
      "nairobi", "lima", "warsaw", "bogota", "hanoi", "cairo", "oslo", "prague", "vienna", "athens",
      "istanbul", "bangkok", "jakarta", "santiago", "montreal", "vancouver", "guadalajara", "krakow", "porto",
      "marrakesh", "reykjavik", "tbilisi", "accra", "kigali", "cusco", "valparaiso", "da nang", "chiang mai",
      "ljubljana", "tallinn", "riga", "vilnius", "sarajevo", "zanzibar", "queenstown"};
  static const std::vector<std::string_view> amount = {
      "500 dollars", "100 dollars", "two thousand dollars", "fifty bucks", "1200", "300 dollars", "a thousand dollars",
      "75 dollars", "ten grand", "the full amount", "half my paycheck", "eight hundred dollars", "40 dollars"};
  static const std::vector<std::string_view> day = {
      "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday", "the first", "the fifteenth",
      "march third", "june tenth", "new years eve", "thanksgiving", "the weekend", "payday"};
  if (name == "merchant") return merchant;
  if (name == "person") return person;
  if (name == "place") return place;
  if (name == "amount") return amount;
  if (name == "day") return day;
  throw Error(ErrorKind::BadPattern, "unknown slot '" + std::string(name) + "'");
}

/// Replaces each "(a|b|...)" group with one alternative and each "{slot}" with
/// a filler drawn with a skew toward the head of the list; collapses spaces.
inline std::string expand_pattern(std::string_view pattern, escalada::detail::Rng& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const std::size_t close = pattern.find('}', i);
      if (close == std::string_view::npos) throw Error(ErrorKind::BadPattern, "unbalanced slot in pattern");
      const auto& fillers = desk_slot(pattern.substr(i + 1, close - i - 1));
      const double u = rng.uniform();
      out += fillers[static_cast<std::size_t>(u * u * static_cast<double>(fillers.size()))];
      i = close + 1;
    } else if (pattern[i] == '(') {
      const std::size_t close = pattern.find(')', i);
      if (close == std::string_view::npos) throw Error(ErrorKind::BadPattern, "unbalanced group in pattern");
      const auto options = escalada::detail::split_on(pattern.substr(i + 1, close - i - 1), '|');
      out += expand_pattern(options[rng.below(options.size())], rng);
      i = close + 1;
    } else {
      out += pattern[i++];
    }
  }
  return escalada::detail::join(escalada::detail::split_whitespace(out), " ");
}

struct DeskCorpusConfig {
  std::size_t per_intent = 60;
  std::size_t out_of_scope = 300;
  std::uint64_t seed = 2026;
};

/// Deterministic for a given config; texts are unique across the corpus.
inline LabeledDataset make_desk_corpus(const DeskCorpusConfig& config = {}) {
  LabeledDataset ds;
  std::unordered_set<std::string> seen;
  escalada::detail::Rng rng(config.seed);
  const auto& openers = desk_openers();
  const auto& closers = desk_closers();
  auto decorate = [&](const std::string& core) {
    std::string s(openers[rng.below(openers.size())]);
    s += ' ';
    s += core;
    s += ' ';
    s += closers[rng.below(closers.size())];
    return escalada::detail::join(escalada::detail::split_whitespace(s), " ");
  };

  for (const auto& intent : desk_intents()) {
    std::size_t made = 0;
    for (std::size_t attempt = 0; made < config.per_intent && attempt < config.per_intent * 50; ++attempt) {
      const auto& pattern = intent.patterns[rng.below(intent.patterns.size())];
      std::string text = decorate(expand_pattern(pattern, rng));
      if (!seen.insert(text).second) continue;
      ds.relevant.push_back({std::string(intent.tier3) + "-" + std::to_string(made), std::move(text),
                             {std::string(intent.tier1), std::string(intent.tier2), std::string(intent.tier3)}});
      ++made;
    }
  }
  const auto& oos = out_of_scope_patterns();
  for (std::size_t attempt = 0; ds.irrelevant.size() < config.out_of_scope && attempt < config.out_of_scope * 50;
       ++attempt) {
    std::string text = decorate(expand_pattern(oos[rng.below(oos.size())], rng));
    if (!seen.insert(text).second) continue;
    ds.irrelevant.push_back({"oos-" + std::to_string(ds.irrelevant.size()), std::move(text)});
  }
  validate_dataset(ds);
  return ds;
}

}  // namespace escalada::bench
