export { Bit, ClientMessage, FeedbackEntry, LineSplitter, ServerMessage,
         decodeLine, encodeLine } from "./protocol.js";
export { DisconnectedError, HubClient } from "./hubClient.js";
export { DEFAULT_LEVELS, LevelSpec, World, loadLevels, oracleTarget,
         validateLevel } from "./levels.js";
export { CURIOUS_FACTS, Clock, GameSession, MissionResult, OracleLink } from "./session.js";
export { FeedbackPanel, renderFeedback } from "./feedback.js";
export { binomialTail } from "./binomial.js";
export { attachInput, keyToBit } from "./keyboard.js";
